"""Triangulations of labeled base domains.

Four-arc domains get a structured transfinite (Coons) grid whose quads are
split along the shorter diagonal; on a square this yields right isosceles
triangles, whose stiffness matrices are M-matrices.  Other domains are filled
with an equilateral lattice and triangulated by Delaunay.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import Delaunay

from .config import DEFAULTS
from .errors import DegenerateTriangleError, MeshingError
from .geometry import base_distance, move_from_origin, move_to_origin


@dataclass(frozen=True)
class GraphMesh:
    """Base triangulation with one height per vertex.

    ``loop`` lists the boundary vertices in boundary order starting at the
    first vertex of arc 0.  ``arc_index`` is -1 for interior vertices; a
    junction vertex carries the index of the arc that starts there.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    heights: np.ndarray
    h: float
    loop: np.ndarray
    arc_index: np.ndarray
    arc_param: np.ndarray
    junction: np.ndarray
    stats: object = None
    jumps: tuple = ()                # (vertex, height on incoming arc, height on outgoing arc)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def interior(self):
        return np.flatnonzero(~self.boundary)

    def with_heights(self, heights):
        heights = np.asarray(heights, float)
        if heights.shape != (self.n_vertices,):
            raise ValueError("need one height per vertex")
        return replace(self, heights=heights.copy())

    def edges(self):
        """Unique undirected edges, shape (E, 2) with i < j."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)


def triangle_areas(vertices, triangles):
    """Signed Euclidean areas of base triangles."""
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def min_angles_deg(vertices, triangles):
    p = vertices[triangles]
    out = np.full(len(triangles), 180.0)
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        out = np.minimum(out, np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    return out


def _coordinate_length(arc):
    """Coordinate length of an arc with a dense (parameter, cumulative length) table."""
    s_dense = np.linspace(0.0, arc.length, 2049)
    p_dense = arc.point_at(s_dense)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(p_dense, axis=0), axis=1))])
    return cum[-1], s_dense, cum


def _arc_samples(arc, count):
    """``count`` pieces of (nearly) equal coordinate length."""
    _, s_dense, cum = _coordinate_length(arc)
    s = np.interp(np.linspace(0.0, cum[-1], count + 1), cum, s_dense)
    s[0], s[-1] = 0.0, arc.length
    pts = arc.point_at(s)
    pts[0], pts[-1] = arc.start, arc.end
    return s, pts


def _inside(poly, pts):
    """Even-odd point-in-polygon test, vectorized over points."""
    inside = np.zeros(len(pts), bool)
    x, y = pts[:, 0], pts[:, 1]
    q = np.roll(poly, -1, axis=0)
    for (x1, y1), (x2, y2) in zip(poly, q):
        cond = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (x < xc)
    return inside


def distance_to_polyline(poly, pts):
    a = poly
    b = np.roll(poly, -1, axis=0)
    best = np.full(len(pts), np.inf)
    for chunk in range(0, len(a), 256):
        aa, bb = a[chunk:chunk + 256], b[chunk:chunk + 256]
        ab = bb - aa
        t = np.einsum("pkj,kj->pk", pts[:, None] - aa[None], ab) / np.einsum("kj,kj->k", ab, ab)
        t = np.clip(t, 0, 1)
        d = np.linalg.norm(aa[None] + t[..., None] * ab[None] - pts[:, None], axis=-1)
        best = np.minimum(best, d.min(axis=1))
    return best


def build_mesh(spec, h, graded_corners=(), corner_radius=0.25):
    """Triangulate the base domain of ``spec`` with target edge length ``h``.

    Lengths are measured in model coordinates.  Junction vertices are mesh
    vertices and boundary vertices lie exactly on the arcs.

    Each vertex index in ``graded_corners`` gets a polar patch of radius
    ``corner_radius``: rays uniform in angle with arc spacing ``h`` on the
    outer ring, and rings graded quadratically towards the corner.  Ring-one neighbours of such a corner
    then sample every direction into the domain, which is what a vertical
    segment of the limit surface over that corner needs.  The patch
    triangles are thin by design and are exempt from the angle check.
    """
    if not h > 0:
        raise MeshingError("mesh size must be positive")
    if h >= spec.diameter():
        raise MeshingError(f"mesh size {h} is not below the domain diameter {spec.diameter():.6g}",
                           region="domain")
    arcs = spec.arcs
    counts = [max(1, int(np.ceil(_coordinate_length(a)[0] / h))) for a in arcs]
    if len(arcs) == 4:
        counts[0] = counts[2] = max(counts[0], counts[2])
        counts[1] = counts[3] = max(counts[1], counts[3])
    samples = [_arc_samples(a, c) for a, c in zip(arcs, counts)]

    b_pts, b_arc, b_par = [], [], []
    for i, (s, pts) in enumerate(samples):
        b_pts.append(pts[:-1])
        b_arc.append(np.full(len(s) - 1, i))
        b_par.append(s[:-1])
    b_pts = np.concatenate(b_pts)
    b_arc = np.concatenate(b_arc)
    b_par = np.concatenate(b_par)

    if len(arcs) == 4:
        verts, tris = _coons(samples, counts)
    else:
        verts, tris = _lattice(b_pts, h)
    nb = len(b_pts)
    patch_tri = np.zeros(len(tris), bool)
    if len(graded_corners):
        verts, tris, b_arc, b_par, nb, patch_tri = _graded(
            spec, h, verts, nb, b_arc, b_par, sorted(set(graded_corners)), corner_radius)

    n = len(verts)
    boundary = np.zeros(n, bool)
    boundary[:nb] = True
    arc_index = np.full(n, -1)
    arc_index[:nb] = b_arc
    arc_param = np.zeros(n)
    arc_param[:nb] = b_par
    junction = np.zeros(n, bool)
    junction[:nb] = b_par == 0.0

    area = triangle_areas(verts, tris)
    if np.any(area < 0):
        if np.all(area < 0):
            tris = tris[:, [0, 2, 1]]
            area = -area
        else:
            bad = verts[tris[np.argmin(area)]].mean(axis=0)
            raise MeshingError("structured grid folds over", region=bad.tolist())
    if np.any(area <= 1e-12 * h * h):
        raise DegenerateTriangleError("mesh contains a degenerate triangle")
    ang = min_angles_deg(verts, tris[~patch_tri])
    if len(ang) and ang.min() < DEFAULTS.min_angle_deg:
        bad = verts[tris[~patch_tri][np.argmin(ang)]].mean(axis=0)
        raise MeshingError(f"minimum angle {ang.min():.2f} deg below {DEFAULTS.min_angle_deg}",
                           region=bad.tolist())
    _check_conforming(tris, nb)
    return GraphMesh(vertices=verts, triangles=tris, boundary=boundary, heights=np.zeros(n),
                     h=float(h), loop=np.arange(nb), arc_index=arc_index, arc_param=arc_param,
                     junction=junction)


def _corner_patch(spec, v, h, radius):
    """Polar patch at junction vertex ``v`` built in the frame centred there."""
    params = spec.params
    arcs = spec.arcs
    out_arc, in_arc = arcs[v], arcs[v - 1]
    if not (out_arc.geodesic and in_arc.geodesic):
        raise MeshingError("corner grading needs geodesic arcs on both sides", region=("vertex", v))
    c = out_arc.start
    scale = 1.0
    if params.kappa < 0:
        z = np.hypot(*c) / params.disk_radius
        scale = 1.0 / (1.0 - z * z)
    d1 = move_to_origin(params, c, out_arc.point_at(min(1e-3, 0.5 * out_arc.length)))
    d0 = move_to_origin(params, c, in_arc.point_at(max(in_arc.length - 1e-3, 0.5 * in_arc.length)))
    phi1 = np.arctan2(d1[1], d1[0])
    theta = (np.arctan2(d0[1], d0[0]) - phi1) % (2 * np.pi)
    # ring radii radius * (j / J)^2: outer spacing about h, inner radius h^2 / (4 radius)
    rings = max(2, int(np.ceil(2 * radius / h)))
    rays = max(2, int(np.ceil(theta * radius / h)))
    r = radius * scale * (np.arange(1, rings + 1) / rings) ** 2
    phi = phi1 + theta * np.arange(rays + 1) / rays
    frame = np.stack([np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi))], axis=-1)
    pts = move_from_origin(params, c, frame.reshape(-1, 2)).reshape(rings, rays + 1, 2)
    dist = base_distance(params, np.broadcast_to(c, (rings, 2)), pts[:, 0])
    return c, pts, dist, radius


def _graded(spec, h, verts, nb, b_arc, b_par, corners, radius):
    arcs = spec.arcs
    keep = np.ones(len(verts), bool)
    extra_b, extra_arc, extra_par, extra_in, centers = [], [], [], [], []
    for v in corners:
        c, pts, dist, rho = _corner_patch(spec, v, h, radius)
        near = np.linalg.norm(verts - c, axis=1) < rho + 0.5 * h
        near[np.flatnonzero(np.all(verts == c, axis=1))] = False
        keep &= ~near
        prev = (v - 1) % len(arcs)
        extra_b += [pts[:, 0], pts[:, -1]]
        extra_arc += [np.full(len(dist), v), np.full(len(dist), prev)]
        extra_par += [dist, arcs[prev].length - base_distance(
            spec.params, np.broadcast_to(c, (len(dist), 2)), pts[:, -1])]
        extra_in.append(pts[:, 1:-1].reshape(-1, 2))
        centers.append((c, rho))
    kb = keep[:nb]
    bp = np.concatenate([verts[:nb][kb]] + extra_b)
    ba = np.concatenate([b_arc[kb]] + extra_arc)
    bq = np.concatenate([b_par[kb]] + extra_par)
    order = np.lexsort((bq, ba))
    bp, ba, bq = bp[order], ba[order], bq[order]
    inner = np.concatenate([verts[nb:][keep[nb:]]] + extra_in)
    allv = np.concatenate([bp, inner])
    tri = Delaunay(allv).simplices
    cent = allv[tri].mean(axis=1)
    tri = tri[_inside(bp, cent)]
    area = triangle_areas(allv, tri)
    tri[area < 0] = tri[area < 0][:, [0, 2, 1]]
    in_patch = np.zeros(len(tri), bool)
    for c, rho in centers:
        in_patch |= np.any(np.linalg.norm(allv[tri] - c, axis=-1) < rho + 1.5 * h, axis=1)
    return allv, tri, ba, bq, len(bp), in_patch


def _coons(samples, counts):
    """Transfinite grid on a four-sided domain, boundary vertices first."""
    m, k = counts[0], counts[1]
    bottom = samples[0][1]                 # P(u, 0)
    right = samples[1][1]                  # P(1, v)
    top = samples[2][1][::-1]              # P(u, 1)
    left = samples[3][1][::-1]             # P(0, v)
    u = np.linspace(0, 1, m + 1)[:, None, None]
    v = np.linspace(0, 1, k + 1)[None, :, None]
    c00, c10, c11, c01 = bottom[0], bottom[-1], top[-1], top[0]
    grid = ((1 - v) * bottom[:, None] + v * top[:, None]
            + (1 - u) * left[None] + u * right[None]
            - ((1 - u) * (1 - v) * c00 + u * (1 - v) * c10 + u * v * c11 + (1 - u) * v * c01))
    grid[:, 0], grid[:, -1] = bottom, top
    grid[0, :], grid[-1, :] = left, right

    index = -np.ones((m + 1, k + 1), int)
    loop = ([(i, 0) for i in range(m)] + [(m, j) for j in range(k)]
            + [(i, k) for i in range(m, 0, -1)] + [(0, j) for j in range(k, 0, -1)])
    for n_, (i, j) in enumerate(loop):
        index[i, j] = n_
    nxt = len(loop)
    for i in range(1, m):
        for j in range(1, k):
            index[i, j] = nxt
            nxt += 1
    verts = np.empty((nxt, 2))
    verts[index.ravel()] = grid.reshape(-1, 2)

    i, j = np.meshgrid(np.arange(m), np.arange(k), indexing="ij")
    i, j = i.ravel(), j.ravel()
    a, b = index[i, j], index[i + 1, j]
    c, d = index[i + 1, j + 1], index[i, j + 1]
    d_ac = np.linalg.norm(verts[a] - verts[c], axis=1)
    d_bd = np.linalg.norm(verts[b] - verts[d], axis=1)
    use_ac = d_ac <= d_bd * (1 + 1e-12)
    t1 = np.where(use_ac[:, None], np.stack([a, b, c], 1), np.stack([a, b, d], 1))
    t2 = np.where(use_ac[:, None], np.stack([a, c, d], 1), np.stack([b, c, d], 1))
    return verts, np.concatenate([t1, t2])


def _lattice(b_pts, h):
    lo, hi = b_pts.min(axis=0), b_pts.max(axis=0)
    dy = h * np.sqrt(3) / 2
    ys = np.arange(lo[1], hi[1] + dy, dy)
    rows = []
    for r, y in enumerate(ys):
        xs = np.arange(lo[0] + (0.5 * h if r % 2 else 0.0), hi[0] + h, h)
        rows.append(np.column_stack([xs, np.full(len(xs), y)]))
    cand = np.concatenate(rows)
    keep = _inside(b_pts, cand) & (distance_to_polyline(b_pts, cand) >= 0.6 * h)
    verts = np.concatenate([b_pts, cand[keep]])
    tri = Delaunay(verts).simplices
    cent = verts[tri].mean(axis=1)
    tri = tri[_inside(b_pts, cent)]
    area = triangle_areas(verts, tri)
    tri[area < 0] = tri[area < 0][:, [0, 2, 1]]
    return verts, tri


def _check_conforming(tris, nb):
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e.sort(axis=1)
    edges, counts = np.unique(e, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshingError("non-manifold edge in triangulation")
    edge_set = set(map(tuple, edges[counts == 1]))
    loop_edges = {tuple(sorted((i, (i + 1) % nb))) for i in range(nb)}
    if edge_set != loop_edges:
        missing = sorted(loop_edges - edge_set)
        where = missing[0] if missing else sorted(edge_set - loop_edges)[0]
        raise MeshingError("triangulation does not conform to the boundary", region=where)
