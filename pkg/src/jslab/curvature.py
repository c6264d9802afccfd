"""Pointwise Gaussian curvature of triangulated surfaces in E(kappa, tau).

At each vertex the ambient coordinates are orthonormalized with the coframe
of the metric there, the surface is fitted by a quadric height function over
its tangent plane (2-ring stencil, least squares), and the intrinsic
curvature of the fitted patch is computed from its first fundamental form
G(s) = J(s)^T g(F(s)) J(s) with the Brioschi formula.  The metric is
evaluated exactly along the patch, so the estimator is intrinsic for every
(kappa, tau) and reduces to osculating-paraboloid fitting in R^3.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .config import DEFAULTS
from .errors import InsufficientStencilError
from .geometry import coframe_at, metric_at

MIN_STENCIL = 6


@dataclass(frozen=True)
class CurvatureField:
    values: np.ndarray          # NaN where not estimated
    reliable: np.ndarray        # False at boundary vertices and where not estimated
    stencil_radius: np.ndarray
    fit_order: int = 2


def _rings(surface, k):
    n = len(surface.points)
    e = surface.edges()
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    adj = (adj + adj.T + sp.identity(n)).tocsr()
    reach = adj
    for _ in range(k - 1):
        reach = reach @ adj
    reach.data[:] = 1.0
    return reach.tocsr()


def _vertex_normal_covectors(surface):
    """Area-weighted sums of triangle covectors at every vertex (Euclidean cross products)."""
    p = surface.points[surface.triangles]
    cov = 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    out = np.zeros((len(surface.points), 3))
    for k in range(3):
        np.add.at(out, surface.triangles[:, k], cov)
    return out


def gaussian_curvature(params, surface, vertices=None, allow_boundary=True, rings=2):
    """Estimate K at ``vertices`` (default: all vertices used by triangles).

    Boundary vertices are estimated from their one-sided stencils and marked
    unreliable.  Raises :class:`InsufficientStencilError` when an interior
    vertex has fewer than six stencil points.
    """
    n = len(surface.points)
    used = np.zeros(n, bool)
    used[surface.triangles.ravel()] = True
    if vertices is None:
        vertices = np.flatnonzero(used)
    vertices = np.asarray(vertices, int)
    boundary = surface.boundary_vertices()
    if not allow_boundary:
        vertices = vertices[~boundary[vertices]]

    reach = _rings(surface, rings)[vertices]
    counts = np.diff(reach.indptr)
    width = counts.max()
    stencil = np.full((len(vertices), width), -1)
    rows = np.repeat(np.arange(len(vertices)), counts)
    cols = np.arange(len(reach.indices)) - np.repeat(reach.indptr[:-1], counts)
    stencil[rows, cols] = reach.indices
    mask = (stencil >= 0) & (stencil != vertices[:, None])
    few = mask.sum(1) < MIN_STENCIL
    if np.any(few & ~boundary[vertices]):
        bad = vertices[few & ~boundary[vertices]][0]
        raise InsufficientStencilError(f"vertex {bad} has fewer than {MIN_STENCIL} stencil points")

    p = surface.points[vertices]
    A = coframe_at(params, p)
    Ainv = np.linalg.inv(A)
    g0 = metric_at(params, p)
    # unit normal in orthonormal coordinates: A g^{-1} covector, normalized
    cov = _vertex_normal_covectors(surface)[vertices]
    nvec = np.einsum("nij,nj->ni", A, np.linalg.solve(g0, cov[..., None])[..., 0])
    nvec /= np.linalg.norm(nvec, axis=1)[:, None]
    helper = np.where(np.abs(nvec[:, [0]]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = np.cross(nvec, helper)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(nvec, e1)

    q = surface.points[np.where(stencil >= 0, stencil, 0)] - p[:, None]
    X = np.einsum("nij,nkj->nki", A, q)
    s1 = np.einsum("nki,ni->nk", X, e1)
    s2 = np.einsum("nki,ni->nk", X, e2)
    hh = np.einsum("nki,ni->nk", X, nvec)
    w = mask.astype(float)
    radius = np.sqrt(np.max(w * (s1 ** 2 + s2 ** 2), axis=1))
    scale = np.where(radius > 0, radius, 1.0)
    u1, u2 = s1 / scale[:, None], s2 / scale[:, None]
    basis = np.stack([u1, u2, u1 * u1, u1 * u2, u2 * u2], axis=-1)
    M = np.einsum("nk,nka,nkb->nab", w, basis, basis) + 1e-14 * np.eye(5)
    rhs = np.einsum("nk,nka,nk->na", w, basis, hh / scale[:, None])
    coef = np.linalg.solve(M, rhs[..., None])[..., 0]
    # back to unscaled s: h = scale * (a u1 + b u2 + c u1^2 + d u1 u2 + e u2^2)
    a, b = coef[:, 0], coef[:, 1]
    c, d, e = (coef[:, 2:5] / scale[:, None]).T

    delta = DEFAULTS.brioschi_step * scale
    offsets = np.array([-1.0, 0.0, 1.0])
    EFG = np.empty((len(vertices), 3, 3, 3))
    for i, du in enumerate(offsets):
        for j, dv in enumerate(offsets):
            su, sv = du * delta, dv * delta
            hval = a * su + b * sv + c * su * su + d * su * sv + e * sv * sv
            h1 = a + 2 * c * su + d * sv
            h2 = b + d * su + 2 * e * sv
            X0 = su[:, None] * e1 + sv[:, None] * e2 + hval[:, None] * nvec
            F = p + np.einsum("nij,nj->ni", Ainv, X0)
            J1 = np.einsum("nij,nj->ni", Ainv, e1 + h1[:, None] * nvec)
            J2 = np.einsum("nij,nj->ni", Ainv, e2 + h2[:, None] * nvec)
            g = metric_at(params, F)
            EFG[:, i, j, 0] = np.einsum("ni,nij,nj->n", J1, g, J1)
            EFG[:, i, j, 1] = np.einsum("ni,nij,nj->n", J1, g, J2)
            EFG[:, i, j, 2] = np.einsum("ni,nij,nj->n", J2, g, J2)
    K = _brioschi(EFG, delta)
    values = np.full(n, np.nan)
    values[vertices] = np.where(few, np.nan, K)
    reliable = np.zeros(n, bool)
    reliable[vertices] = ~few & ~boundary[vertices]
    rad = np.full(n, np.nan)
    rad[vertices] = radius
    return CurvatureField(values=values, reliable=reliable, stencil_radius=rad)


def _brioschi(EFG, delta):
    E, F, G = EFG[..., 0], EFG[..., 1], EFG[..., 2]
    dd = delta

    def du(X):
        return (X[:, 2, 1] - X[:, 0, 1]) / (2 * dd)

    def dv(X):
        return (X[:, 1, 2] - X[:, 1, 0]) / (2 * dd)

    E0, F0, G0 = E[:, 1, 1], F[:, 1, 1], G[:, 1, 1]
    Eu, Ev, Fu, Fv, Gu, Gv = du(E), dv(E), du(F), dv(F), du(G), dv(G)
    Evv = (E[:, 1, 2] - 2 * E0 + E[:, 1, 0]) / dd ** 2
    Guu = (G[:, 2, 1] - 2 * G0 + G[:, 0, 1]) / dd ** 2
    Fuv = (F[:, 2, 2] - F[:, 2, 0] - F[:, 0, 2] + F[:, 0, 0]) / (4 * dd ** 2)
    z = np.zeros_like(E0)
    m1 = np.stack([
        np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], -1),
        np.stack([Fv - 0.5 * Gu, E0, F0], -1),
        np.stack([0.5 * Gv, F0, G0], -1)], -2)
    m2 = np.stack([
        np.stack([z, 0.5 * Ev, 0.5 * Gu], -1),
        np.stack([0.5 * Ev, E0, F0], -1),
        np.stack([0.5 * Gu, F0, G0], -1)], -2)
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (E0 * G0 - F0 * F0) ** 2
