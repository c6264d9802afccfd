"""Curvature bounds near the seam together with blow-up diagnostics.

Intrinsic distances are Dijkstra distances over mesh edges whose lengths are
measured in the ambient metric at the edge midpoint, followed by one pass of
one-ring averaging away from the sources.  The graph also joins the two
opposite vertices of every pair of adjacent triangles; structured grids split
all quads the same way, and without these links paths across the missing
diagonal are up to sqrt(2) too long.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .config import DEFAULTS
from .curvature import CurvatureField, gaussian_curvature
from .errors import BallExceedsMeshError, OutsideDiscError, SeamPointError
from .geometry import ModelParams, coframe_at, homothety, metric_at, rescaled_params
from .surface import SurfaceMesh


def _opposite_pairs(surface):
    """Opposite vertices of triangle pairs sharing an edge."""
    t = surface.triangles
    k = np.arange(len(t))
    half = np.concatenate([np.column_stack([t[:, a], t[:, b], t[:, c], k])
                           for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1))])
    key = np.sort(half[:, :2], axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, half = key[order], half[order]
    same = np.all(key[1:] == key[:-1], axis=1)
    pairs = np.column_stack([half[:-1, 2][same], half[1:, 2][same]])
    pairs.sort(axis=1)
    return np.unique(pairs[pairs[:, 0] != pairs[:, 1]], axis=0)


def edge_lengths(params, surface):
    """Graph edges and their metric lengths (metric frozen at the midpoint).

    The edges are the mesh edges plus the links across adjacent triangle pairs.
    """
    e = np.unique(np.concatenate([surface.edges(), _opposite_pairs(surface)]), axis=0)
    p, q = surface.points[e[:, 0]], surface.points[e[:, 1]]
    d = q - p
    g = metric_at(params, 0.5 * (p + q))
    return e, np.sqrt(np.einsum("ni,nij,nj->n", d, g, d))


def _graph(params, surface):
    e, w = edge_lengths(params, surface)
    n = len(surface.points)
    m = sp.coo_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n))
    return (m + m.T).tocsr()


def intrinsic_distance(params, surface, sources, limit=np.inf, smooth=True):
    """Distance from the vertex set ``sources`` to every vertex.

    Vertices farther than ``limit`` get ``inf``.
    """
    sources = np.atleast_1d(np.asarray(sources, int))
    G = _graph(params, surface)
    d = dijkstra(G, directed=False, indices=sources, min_only=True, limit=limit)
    if not smooth:
        return d
    n = G.shape[0]
    e = surface.edges()
    adj = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    adj = (adj + adj.T + sp.identity(n)).tocsr()
    finite = np.isfinite(d)
    total = adj @ np.where(finite, d, 0.0)
    count = adj @ finite.astype(float)
    # average only where the whole one-ring is reached
    full = count == np.diff(adj.indptr)
    out = np.where(full & finite, total / np.maximum(count, 1), d)
    out[sources] = 0.0
    return out


# --- f = sqrt|K| d(x, dB) --------------------------------------------------------

@dataclass(frozen=True)
class FResult:
    values: np.ndarray      # per vertex; NaN outside the ball
    ball: np.ndarray        # vertex indices of B(p, c)
    rim: np.ndarray         # discrete ball boundary
    argmax: int
    maximum: float
    degenerate: bool        # f vanishes identically (argmax arbitrary)


def intrinsic_ball(params, surface, center, radius):
    """Vertices of B(center, radius) and its rim; rejects balls touching the mesh boundary."""
    d = intrinsic_distance(params, surface, [center], limit=2 * radius)
    ball = np.flatnonzero(d < radius)
    boundary = surface.boundary_vertices()
    if np.any(boundary[ball]):
        raise BallExceedsMeshError(f"ball of radius {radius} around vertex {center} "
                                   "reaches the mesh boundary")
    inside = np.zeros(len(d), bool)
    inside[ball] = True
    e = surface.edges()
    cut = inside[e[:, 0]] != inside[e[:, 1]]
    rim = np.unique(np.where(inside[e[cut, 0]], e[cut, 0], e[cut, 1]))
    return ball, rim, d


def f_function(params, surface, field, center, radius):
    """f(x) = sqrt|K(x)| d(x, dB) on B(center, radius), with its maximizer.

    ``field`` is a :class:`CurvatureField` on ``surface``.  f is zero on the
    rim of the ball by construction.
    """
    ball, rim, _ = intrinsic_ball(params, surface, center, radius)
    if len(rim) == 0:
        raise BallExceedsMeshError("the ball covers the whole surface")
    to_rim = intrinsic_distance(params, surface, rim, limit=2 * radius)
    k = np.abs(field.values[ball])
    if np.any(~np.isfinite(k)):
        raise ValueError("curvature field is missing values inside the ball")
    values = np.full(len(surface.points), np.nan)
    values[ball] = np.sqrt(k) * to_rim[ball]
    values[rim] = 0.0
    j = ball[np.argmax(values[ball])]
    return FResult(values=values, ball=ball, rim=rim, argmax=int(j),
                   maximum=float(values[j]), degenerate=bool(values[j] == 0.0))


# --- curvature scan --------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureScan:
    point: tuple
    radius: float
    levels: tuple
    sup_abs_k: tuple           # per level, over B_n(p, R)
    boundary_distance: tuple   # per level, intrinsic distance from p to the mesh boundary
    seam_vertex: tuple         # per level, welded index used for p
    passed: bool
    insufficient_levels: bool

    def summary(self):
        return {"point": list(self.point), "radius": self.radius, "levels": list(self.levels),
                "sup_abs_k": list(self.sup_abs_k),
                "boundary_distance": list(self.boundary_distance),
                "passed": self.passed, "insufficient_levels": self.insufficient_levels}


def bounded_sequence(values, growth=None, min_levels=None):
    """(passed, insufficient): last value within ``growth`` times the earlier maximum."""
    growth = DEFAULTS.scan_growth if growth is None else growth
    min_levels = DEFAULTS.scan_min_levels if min_levels is None else min_levels
    values = list(values)
    if len(values) < 2:
        return True, True
    ok = values[-1] <= growth * max(values[:-1])
    return bool(ok), len(values) < min_levels


def seam_vertex(ext, point):
    """Interior seam vertex nearest to ``point`` (model coordinates)."""
    surf = ext.surface
    bnd = surf.boundary_vertices()
    inner = ext.seam[~bnd[ext.seam]]
    if len(inner) == 0:
        raise SeamPointError("the seam has no interior vertices")
    p = np.asarray(point, float)
    dist = np.linalg.norm(surf.points[inner] - p, axis=1)
    k = int(np.argmin(dist))
    spacing = np.linalg.norm(np.diff(surf.points[ext.seam], axis=0), axis=1)
    tol = max(surf.h, float(spacing.max()) if len(spacing) else 0.0)
    if dist[k] > tol:
        raise SeamPointError(f"point {tuple(p)} is {dist[k]:.3g} away from the seam interior")
    return int(inner[k])


def curvature_scan(run, extended, point, radius):
    """sup |K_n| over the intrinsic ball B_n(point, radius) on each doubled surface.

    ``run`` is a :class:`~jslab.solver.TruncationRun` or a sequence of level
    numbers matching ``extended``.
    """
    levels = tuple(getattr(run, "schedule", run))
    if len(levels) != len(extended):
        raise ValueError("one extended surface per level is required")
    sups, dists, used = [], [], []
    for ext in extended:
        params = ext.params
        v = seam_vertex(ext, point)
        ball, _, _ = intrinsic_ball(params, ext.surface, v, radius)
        bnd = np.flatnonzero(ext.surface.boundary_vertices())
        d = intrinsic_distance(params, ext.surface, [v], smooth=False)
        dists.append(float(d[bnd].min()) if len(bnd) else np.inf)
        K = gaussian_curvature(params, ext.surface, vertices=ball)
        sups.append(float(np.nanmax(np.abs(K.values[ball]))))
        used.append(v)
    passed, few = bounded_sequence(sups)
    return CurvatureScan(point=tuple(float(x) for x in point), radius=float(radius), levels=levels,
                         sup_abs_k=tuple(sups), boundary_distance=tuple(dists),
                         seam_vertex=tuple(used), passed=passed, insufficient_levels=few)


# --- blow-up ---------------------------------------------------------------------

@dataclass(frozen=True)
class BlowupFrame:
    lam: float
    params: ModelParams          # rescaled parameters
    surface: SurfaceMesh         # image under the homothety
    field: CurvatureField        # K / lambda^2
    rho_tilde: float             # lambda * rho / 2 (NaN when rho is not given)


def blowup_rescale(params, surface, field, lam, rho=None):
    """Apply the homothety of ratio ``lam``; curvature scales by 1/lam^2 exactly."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    new_params = rescaled_params(lam, params)
    pts = homothety(lam, surface.points)
    scaled = CurvatureField(values=field.values / lam**2, reliable=field.reliable,
                            stencil_radius=field.stencil_radius * lam, fit_order=field.fit_order)
    return BlowupFrame(lam=float(lam), params=new_params,
                       surface=SurfaceMesh(pts, surface.triangles, surface.h * lam),
                       field=scaled, rho_tilde=np.nan if rho is None else lam * rho / 2)


def normalization_check(frame, vertex):
    """|K~| at ``vertex`` re-estimated on the rescaled surface with the rescaled metric."""
    K = gaussian_curvature(frame.params, frame.surface, vertices=[vertex])
    return float(abs(K.values[vertex]))


def euclidean_limit_deviation(lam, tau, radius, kappa=-1.0, samples=64):
    """Largest entry of |coframe - I| of the rescaled metric over the disc of ``radius``.

    The coframe e with ds_lambda^2 = e^T e has entries mu - 1 and
    (tau/lambda) mu x, (tau/lambda) mu y, so the value is
    max(mu(R) - 1, (tau/lambda) mu(R) R) for kappa < 0.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    params = rescaled_params(lam, ModelParams(kappa, tau))
    if kappa < 0 and not radius < params.disk_radius:
        raise OutsideDiscError(f"radius {radius} does not fit in the rescaled disc")
    r = np.linspace(0.0, radius, samples)
    th = np.linspace(0.0, 2 * np.pi, 4 * samples + 1)
    R, T = np.meshgrid(r, th)
    p = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel(),
                         np.zeros(R.size)])
    # exact points on the circle along the axes
    p = np.vstack([p, [[radius, 0, 0], [0, radius, 0], [-radius, 0, 0], [0, -radius, 0]]])
    A = coframe_at(params, p)
    return float(np.max(np.abs(A - np.eye(3))))


@dataclass(frozen=True)
class GrowthReport:
    levels: tuple
    f_max: tuple
    rho_tilde: tuple
    radius: float


def grow_radius_check(levels, f_max, radius):
    """rho~ = f(p_k)/2 per level for scans with the common ball radius ``radius``."""
    f_max = tuple(float(v) for v in f_max)
    if len(f_max) != len(levels):
        raise ValueError("one f maximum per level is required")
    return GrowthReport(levels=tuple(levels), f_max=f_max,
                        rho_tilde=tuple(v / 2 for v in f_max), radius=float(radius))
