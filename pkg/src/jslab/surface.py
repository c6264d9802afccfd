"""Triangulated surfaces in model coordinates (x, y, t)."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import metric_at


@dataclass(frozen=True)
class SurfaceMesh:
    points: np.ndarray       # (N, 3)
    triangles: np.ndarray    # (T, 3), consistently oriented
    h: float

    def edges(self, return_counts=False):
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0, return_counts=return_counts)

    def boundary_vertices(self):
        edges, counts = self.edges(return_counts=True)
        mask = np.zeros(len(self.points), bool)
        mask[edges[counts == 1].ravel()] = True
        return mask

    def neighbors(self):
        """Adjacency lists as a list of sorted index arrays."""
        edges = self.edges()
        n = len(self.points)
        nb = [[] for _ in range(n)]
        for i, j in edges:
            nb[i].append(j)
            nb[j].append(i)
        return [np.array(sorted(x), int) for x in nb]

    def is_manifold(self):
        """Every edge in at most two triangles, used in opposite directions."""
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        uniq, counts = np.unique(directed, axis=0, return_counts=True)
        if np.any(counts > 1):
            return False
        _, ucount = self.edges(return_counts=True)
        return bool(np.all(ucount <= 2))


def triangle_normals(params, points, triangles, at=None):
    """Metric normals of triangles scaled by their metric area.

    The Euclidean cross product of two edges is a covector annihilating the
    triangle; raising its index with the metric gives the normal.  The metric
    is evaluated at ``at`` (one point per triangle) or at the centroids.
    """
    p = points[triangles]
    cov = 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    where = p.mean(axis=1) if at is None else at
    g = metric_at(params, where)
    vec = np.linalg.solve(g, cov[..., None])[..., 0]
    return vec * np.sqrt(np.linalg.det(g))[:, None]


def vertex_normals(params, surface, vertices, tri_mask=None):
    """Area-weighted one-ring metric normals (not normalized) at ``vertices``."""
    tris = surface.triangles if tri_mask is None else surface.triangles[tri_mask]
    out = np.zeros((len(vertices), 3))
    pos = {int(v): k for k, v in enumerate(vertices)}
    sel = np.flatnonzero(np.isin(tris, vertices).any(axis=1))
    for t in sel:
        tri = tris[t]
        for v in tri:
            k = pos.get(int(v))
            if k is not None:
                n = triangle_normals(params, surface.points, tri[None],
                                     at=surface.points[v][None])[0]
                out[k] += n
    return out


def graph_surface(mesh, columns=None):
    """Lift a graph mesh to a surface; replace jump vertices by vertical columns.

    ``columns`` maps a boundary vertex to (start height, end height), the
    heights of Gamma_n on the arcs leaving and entering that vertex; it
    defaults to ``mesh.jumps``.  The fan around such a vertex becomes a
    strip of quads whose inner side is a column of vertices over it, at the
    heights of its ring-one neighbours made monotone.  Returns the surface
    and, per column vertex, the ordered indices of its column.
    """
    if columns is None:
        columns = {v: (after, before) for v, before, after in mesh.jumps}
    pts = np.column_stack([mesh.vertices, mesh.heights])
    tris = mesh.triangles
    keep = np.ones(len(tris), bool)
    new_pts = [pts]
    new_tris = []
    column_index = {}
    nxt = len(pts)
    for v, (z_start, z_end) in columns.items():
        fan = np.flatnonzero(np.any(tris == v, axis=1))
        keep[fan] = False
        succ = {}
        for t in fan:
            tri = tris[t]
            k = int(np.flatnonzero(tri == v)[0])
            succ[int(tri[(k + 1) % 3])] = int(tri[(k + 2) % 3])
        starts = set(succ) - set(succ.values())
        if len(starts) != 1:
            raise ValueError(f"vertex {v} is not a boundary vertex with a simple fan")
        chain = [starts.pop()]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        z = np.concatenate([[z_start], mesh.heights[chain[1:-1]], [z_end]])
        lo, hi = min(z_start, z_end), max(z_start, z_end)
        z = np.clip(z, lo, hi)
        z = np.maximum.accumulate(z) if z_start <= z_end else np.minimum.accumulate(z)
        levels, slot = np.unique(z, return_inverse=True)
        if z_start > z_end:
            levels, slot = levels[::-1], len(levels) - 1 - slot
        ids = np.arange(nxt, nxt + len(levels))
        nxt += len(levels)
        new_pts.append(np.column_stack([np.tile(mesh.vertices[v], (len(levels), 1)), levels]))
        for k in range(len(chain) - 1):
            a, b = chain[k], chain[k + 1]
            ca, cb = ids[slot[k]], ids[slot[k + 1]]
            new_tris.append((ca, a, b))
            if ca != cb:
                new_tris.append((ca, b, cb))
        column_index[v] = ids
    points = np.concatenate(new_pts)
    triangles = np.concatenate([tris[keep]] + ([np.array(new_tris, int)] if new_tris else []))
    # drop the replaced vertices and renumber
    used = np.zeros(len(points), bool)
    used[triangles.ravel()] = True
    remap = -np.ones(len(points), int)
    remap[used] = np.arange(used.sum())
    surface = SurfaceMesh(points=points[used], triangles=remap[triangles], h=mesh.h)
    return surface, {v: remap[ids] for v, ids in column_index.items()}


def weld(surfaces, tol):
    """Merge the vertex sets of several surfaces; drop duplicated triangles.

    Returns the welded surface and, per input, the map from its vertex
    indices to the welded ones.
    """
    pts = np.concatenate([s.points for s in surfaces])
    offsets = np.cumsum([0] + [len(s.points) for s in surfaces])
    tree = cKDTree(pts)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(pts))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    tris = np.concatenate([inverse[s.triangles + off] for s, off in zip(surfaces, offsets)])
    key = np.sort(tris, axis=1)
    _, first = np.unique(key, axis=0, return_index=True)
    tris = tris[np.sort(first)]
    maps = [inverse[off:off + len(s.points)] for s, off in zip(surfaces, offsets)]
    return SurfaceMesh(points=pts[uniq], triangles=tris, h=surfaces[0].h), maps
