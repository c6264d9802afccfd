"""Reflections of E(kappa, tau) and Schwarz extension of solved graphs.

Supported axes:

* the vertical fiber over the origin, for every (kappa, tau): rotation by pi,
  (x, y, t) -> (-x, -y, t);
* any vertical fiber when tau = 0, conjugating that rotation by the base
  isometry moving the fiber to the origin;
* horizontal geodesics {geodesic} x {c} when tau = 0: (p, t) -> (r(p), 2c - t)
  with r the base reflection across the geodesic.
"""

from dataclasses import dataclass, replace

import numpy as np

from .config import DEFAULTS
from .curvature import gaussian_curvature
from .errors import NoSeamError, UnsupportedAxisError
from .geometry import (
    base_distance,
    geodesic_reflection,
    metric_at,
    move_to_origin,
    point_reflection,
)
from .mesh import GraphMesh
from .surface import SurfaceMesh, graph_surface, vertex_normals, weld


@dataclass(frozen=True)
class ReflectionAxis:
    kind: str                      # "vertical" or "horizontal"
    point: tuple = (0.0, 0.0)      # vertical: base point of the fiber
    through: tuple = None          # horizontal: two base points on the geodesic
    level: float = 0.0             # horizontal: height c

    @classmethod
    def vertical(cls, x0=(0.0, 0.0)):
        return cls("vertical", point=tuple(float(v) for v in x0))

    @classmethod
    def horizontal(cls, a, b, level=0.0):
        return cls("horizontal", through=(tuple(map(float, a)), tuple(map(float, b))),
                   level=float(level))


def check_axis(params, axis):
    if axis.kind == "vertical":
        if params.tau > 0 and np.any(np.asarray(axis.point) != 0.0):
            raise UnsupportedAxisError("for tau > 0 only the fiber over the origin is supported")
    elif axis.kind == "horizontal":
        if params.tau > 0:
            raise UnsupportedAxisError("horizontal reflections are only available for tau = 0")
        a, b = map(np.asarray, axis.through)
        if np.array_equal(a, b):
            raise UnsupportedAxisError("a horizontal axis needs two distinct base points")
    else:
        raise UnsupportedAxisError(f"unknown axis kind {axis.kind!r}")


def reflect_point(params, axis, p):
    """Image of ambient point(s) ``p`` (trailing dimension 3)."""
    check_axis(params, axis)
    p = np.array(p, dtype=float)
    if axis.kind == "vertical":
        if np.all(np.asarray(axis.point) == 0.0):
            p[..., :2] = -p[..., :2]
            return p
        return point_reflection(params, np.asarray(axis.point), p)
    a, b = map(np.asarray, axis.through)
    q = geodesic_reflection(params, a, b, p)
    q[..., 2] = 2 * axis.level - p[..., 2]
    return q


def on_axis_distance(params, axis, p):
    """Base (and height) offsets of points from the axis."""
    p = np.asarray(p, float)
    if axis.kind == "vertical":
        c = np.broadcast_to(np.asarray(axis.point), p[..., :2].shape)
        return base_distance(params, c, p[..., :2])
    a, b = map(np.asarray, axis.through)
    q = move_to_origin(params, a, p[..., :2])
    d = move_to_origin(params, a, b)
    d = d / np.hypot(*d)
    off = np.abs(q[..., 0] * d[1] - q[..., 1] * d[0])
    return np.maximum(off, np.abs(p[..., 2] - axis.level))


def isometry_check(params, axis, sample_count=1000, seed=0):
    """Largest relative change of the metric under the reflection differential.

    The differential is taken by central differences; dividing by the
    difference of the representable perturbed inputs removes their rounding.
    """
    check_axis(params, axis)
    rng = np.random.default_rng(seed)
    rmax = 1.0 if params.kappa == 0 else 0.6 * params.disk_radius
    r = rmax * np.sqrt(rng.random(sample_count))
    th = 2 * np.pi * rng.random(sample_count)
    p = np.column_stack([r * np.cos(th), r * np.sin(th), rng.uniform(-1, 1, sample_count)])
    v = rng.normal(size=(sample_count, 3))
    w = rng.normal(size=(sample_count, 3))
    step = DEFAULTS.fd_step
    jac = np.empty((sample_count, 3, 3))
    for k in range(3):
        plus, minus = p.copy(), p.copy()
        plus[:, k] += step
        minus[:, k] -= step
        jac[:, :, k] = (reflect_point(params, axis, plus) - reflect_point(params, axis, minus)) \
            / (plus[:, k] - minus[:, k])[:, None]
    g0 = metric_at(params, p)
    g1 = metric_at(params, reflect_point(params, axis, p))
    dv = np.einsum("nij,nj->ni", jac, v)
    dw = np.einsum("nij,nj->ni", jac, w)
    before = np.einsum("ni,nij,nj->n", v, g0, w)
    after = np.einsum("ni,nij,nj->n", dv, g1, dw)
    scale = np.sqrt(np.einsum("ni,nij,nj->n", v, g0, v) * np.einsum("ni,nij,nj->n", w, g0, w))
    return float(np.max(np.abs(after - before) / scale))


@dataclass(frozen=True)
class ExtendedSurface:
    surface: SurfaceMesh          # welded S = Sigma u gamma u I(Sigma)
    half: np.ndarray              # per welded triangle: 1 or 2
    seam: np.ndarray              # welded indices of the seam, in order along it
    image: np.ndarray             # welded index of I(v) for each welded vertex of half 1
    axis: ReflectionAxis
    params: object
    flipped: bool

    @property
    def half1(self):
        return SurfaceMesh(self.surface.points, self.surface.triangles[self.half == 1],
                           self.surface.h)

    @property
    def half2(self):
        return SurfaceMesh(self.surface.points, self.surface.triangles[self.half == 2],
                           self.surface.h)


def _seam_from_graph(params, mesh, axis):
    snap = mesh.h ** 2
    b = mesh.loop
    pts3 = np.column_stack([mesh.vertices[b], mesh.heights[b]])
    off = on_axis_distance(params, axis, pts3)
    near = b[off <= snap]
    if axis.kind == "vertical":
        if len(near) == 0:
            raise NoSeamError("no boundary vertex lies on the fiber")
        v = int(b[np.argmin(off)])
        jumps = {j[0]: (j[2], j[1]) for j in mesh.jumps}
        vertices = mesh.vertices.copy()
        vertices[v] = axis.point
        snapped = replace(mesh, vertices=vertices)
        if v in jumps:
            surf, cols = graph_surface(snapped, {v: jumps[v]})
            return surf, cols[v]
        surf, _ = graph_surface(snapped, {})
        idx = int(np.flatnonzero(np.all(surf.points[:, :2] == axis.point, axis=1))[0])
        return surf, np.array([idx])
    if len(near) < 2:
        raise NoSeamError("the horizontal axis meets the boundary in fewer than two vertices")
    heights = mesh.heights.copy()
    heights[near] = axis.level
    surf, _ = graph_surface(replace(mesh, heights=heights), {})
    # seam vertices in boundary order (graph_surface keeps vertex numbering here)
    order = [v for v in mesh.loop if v in set(near.tolist())]
    return surf, np.array(order)


def extend_by_reflection(params, solution, axis):
    """Double a solved graph (or an extended surface) across ``axis``."""
    check_axis(params, axis)
    if isinstance(solution, ExtendedSurface):
        surf, seam = solution.surface, solution.seam
    elif isinstance(solution, GraphMesh):
        surf, seam = _seam_from_graph(params, solution, axis)
    else:
        raise TypeError("expected a GraphMesh or an ExtendedSurface")
    mirrored = reflect_point(params, axis, surf.points)
    # seam points are fixed; write them back exactly
    mirrored[seam] = surf.points[seam]
    image = SurfaceMesh(mirrored, surf.triangles, surf.h)
    flipped = False
    if len(seam) >= 2:
        e = (seam[0], seam[1])
        t = surf.triangles
        same = np.any((t[:, [0, 1]] == e).all(1) | (t[:, [1, 2]] == e).all(1) | (t[:, [2, 0]] == e).all(1))
        # image triangles reuse the indices, so the seam edge keeps its direction
        flipped = bool(same)
        if not same:
            e2 = (seam[1], seam[0])
            flipped = bool(np.any((t[:, [0, 1]] == e2).all(1) | (t[:, [1, 2]] == e2).all(1)
                                  | (t[:, [2, 0]] == e2).all(1)))
    if flipped:
        image = SurfaceMesh(mirrored, surf.triangles[:, [0, 2, 1]], surf.h)
    scale = max(1.0, float(np.abs(surf.points).max()))
    welded, (m1, m2) = weld([surf, image], 1e-9 * scale)
    n1 = len(surf.triangles)
    half = np.ones(len(welded.triangles), int)
    # weld keeps the input triangles first; the rest came from the image
    half[n1:] = 2
    return ExtendedSurface(surface=welded, half=half, seam=m1[seam], image=m2[np.arange(len(surf.points))],
                           axis=axis, params=params, flipped=flipped)


@dataclass(frozen=True)
class SeamReport:
    c0_gap: float
    normal_kink_max: float
    curvature_jump_max: float
    seam_vertices: int


def _angle(params, p, a, b):
    g = metric_at(params, p)
    na = np.sqrt(np.einsum("ni,nij,nj->n", a, g, a))
    nb = np.sqrt(np.einsum("ni,nij,nj->n", b, g, b))
    c = np.einsum("ni,nij,nj->n", a, g, b) / (na * nb)
    return np.arccos(np.clip(c, -1.0, 1.0))


def seam_smoothness_report(params, ext):
    """Position gap and normal kink along the seam, plus the curvature jump.

    Interior seam vertices are those not on the welded boundary.  The kink is
    the metric angle between the area-weighted one-ring normals of the two
    halves; the curvature jump compares the two-sided estimate at a seam
    vertex with the estimate from half 1 alone.
    """
    surf = ext.surface
    seam = ext.seam
    bnd = surf.boundary_vertices()
    inner = seam[~bnd[seam]] if len(seam) > 1 else seam
    mirrored = reflect_point(params, ext.axis, surf.points[seam])
    c0 = float(np.max(np.abs(mirrored - surf.points[seam]))) if len(seam) else 0.0
    if len(inner) == 0:
        return SeamReport(c0, 0.0, 0.0, len(seam))
    n1 = vertex_normals(params, surf, inner, ext.half == 1)
    n2 = vertex_normals(params, surf, inner, ext.half == 2)
    kink = _angle(params, surf.points[inner], n1, n2)
    both = gaussian_curvature(params, surf, vertices=inner)
    one = gaussian_curvature(params, ext.half1, vertices=inner, allow_boundary=True)
    jump = np.abs(both.values[inner] - one.values[inner])
    return SeamReport(c0, float(np.max(kink)), float(np.nanmax(jump)), len(seam))
