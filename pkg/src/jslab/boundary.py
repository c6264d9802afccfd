"""Labeled boundaries of convex domains and the Jenkins-Serrin solvability test.

A domain is a cyclically ordered list of :class:`BoundaryArc`; consecutive
arcs share endpoints.  Arcs of kind ``"A"`` and ``"B"`` are geodesic segments
of M(kappa) carrying the data +infinity and -infinity; arcs of kind ``"C"``
carry a continuous function of the arc-length parameter.
"""

import itertools
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULTS
from .errors import DomainError, PolygonNotAdmissibleError
from .geometry import (
    ModelParams,
    base_distance,
    check_inside,
    geodesic_between,
    geodesic_points,
    move_to_origin,
    polyline_length,
)

# A one-sided limit: a float (possibly +-inf) or a (liminf, limsup) pair when
# the data has no limit there.
EndLimit = Union[float, tuple]

KINDS = ("A", "B", "C")


@dataclass(frozen=True)
class BoundaryArc:
    kind: str
    points: np.ndarray                # (m, 2) polyline from start to end
    length: float                     # M(kappa) length
    geodesic: bool = True
    data: Optional[Callable] = None   # C arcs: g(s) for s in the open arc (0, length)
    start_limit: EndLimit = None
    end_limit: EndLimit = None
    params: ModelParams = field(default_factory=ModelParams)

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def _cumulative(self):
        d = base_distance(self.params, self.points[:-1], self.points[1:])
        cum = np.concatenate([[0.0], np.cumsum(d)])
        # scale so that the parameter matches the exact length
        return cum * (self.length / cum[-1])

    def point_at(self, s):
        """Base point(s) at arc-length parameter ``s``."""
        s = np.clip(np.asarray(s, float), 0.0, self.length)
        if self.geodesic:
            return geodesic_points(self.params, self.start, self.end, s / self.length)
        cum = self._cumulative()
        x = np.interp(s, cum, self.points[:, 0])
        y = np.interp(s, cum, self.points[:, 1])
        return np.stack([x, y], axis=-1)

    def param_of(self, pts):
        """Arc-length parameter of points lying on the arc (nearest polyline point)."""
        pts = np.atleast_2d(np.asarray(pts, float))
        if self.geodesic:
            d0 = base_distance(self.params, np.broadcast_to(self.start, pts.shape), pts)
            return np.clip(d0, 0.0, self.length)
        cum = self._cumulative()
        a, b = self.points[:-1], self.points[1:]
        ab = b - a
        t = np.einsum("pkj,kj->pk", pts[:, None, :] - a[None], ab) / np.einsum("kj,kj->k", ab, ab)
        t = np.clip(t, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        k = np.argmin(np.linalg.norm(proj - pts[:, None, :], axis=-1), axis=1)
        rows = np.arange(len(pts))
        return cum[k] + t[rows, k] * (cum[k + 1] - cum[k])

    def values(self, s):
        """C-arc data at parameters ``s``; endpoints return their (finite) limits."""
        if self.kind != "C":
            raise ValueError(f"arc of kind {self.kind} carries no finite data")
        s = np.asarray(s, float)
        out = np.empty(s.shape)
        at_start = s <= 0.0
        at_end = s >= self.length
        inner = ~(at_start | at_end)
        if np.any(inner):
            out[inner] = np.broadcast_to(self.data(s[inner]), s[inner].shape)
        for mask, lim in ((at_start, self.start_limit), (at_end, self.end_limit)):
            if np.any(mask):
                if isinstance(lim, tuple) or not np.isfinite(lim):
                    raise ValueError("endpoint has no finite limit; regularize first")
                out[mask] = lim
        return out


def _resolve_limit(data, s):
    with np.errstate(all="ignore"):
        v = float(np.asarray(data(np.array([s]))).ravel()[0])
    if not np.isfinite(v):
        raise DomainError("bad-data", f"data is not finite at arc parameter {s}")
    return v


def make_arc(params, kind, start, end, data=None, limits=(None, None), curve=None,
             samples=65):
    """Build a boundary arc.

    A and B arcs are geodesic.  A C arc is geodesic unless ``curve`` gives its
    polyline.  ``data`` is a vectorized callable of the arc-length parameter;
    a float is taken as constant data.  ``limits`` gives the one-sided limits
    at (start, end); ``None`` means "the data extends continuously".
    """
    if kind not in KINDS:
        raise DomainError("bad-data", f"arc kind must be one of {KINDS}, got {kind!r}")
    start = np.asarray(start, float)
    end = np.asarray(end, float)
    if kind in "AB" and (data is not None or curve is not None):
        raise DomainError("bad-data", f"{kind} arcs are geodesic and carry no data")
    if curve is None:
        seg = geodesic_between(params, start, end, samples)
        pts, length, geodesic = seg.points, seg.length, True
    else:
        pts = np.asarray(curve, float)
        check_inside(params, pts)
        if np.linalg.norm(pts[0] - start) > DEFAULTS.endpoint_atol or \
                np.linalg.norm(pts[-1] - end) > DEFAULTS.endpoint_atol:
            raise DomainError("non-jordan-boundary", "curve does not join the arc endpoints")
        pts = pts.copy()
        pts[0], pts[-1] = start, end
        length, geodesic = polyline_length(params, pts), False
    arc = BoundaryArc(kind=kind, points=pts, length=length, geodesic=geodesic, params=params)
    if kind != "C":
        return arc
    if data is None:
        raise DomainError("bad-data", "C arcs need boundary data")
    if np.isscalar(data):
        const = float(data)
        data = lambda s, c=const: np.full(np.shape(s), c)  # noqa: E731
    lo, hi = limits
    if lo is None:
        lo = _resolve_limit(data, 0.0)
    if hi is None:
        hi = _resolve_limit(data, length)
    return replace(arc, data=data, start_limit=lo, end_limit=hi)


@dataclass(frozen=True)
class DomainSpec:
    params: ModelParams
    arcs: tuple

    @classmethod
    def polygon(cls, params, vertices, kinds, data=None, limits=None, curves=None,
                samples=65):
        """Domain whose i-th arc joins vertex i to vertex i+1 (cyclically).

        ``data``, ``limits`` and ``curves`` are optional dicts keyed by arc index.
        """
        vertices = np.asarray(vertices, float)
        if len(vertices) != len(kinds):
            raise DomainError("bad-data", "need one kind per arc")
        data, limits, curves = data or {}, limits or {}, curves or {}
        arcs = []
        for i, kind in enumerate(kinds):
            arcs.append(make_arc(params, kind, vertices[i], vertices[(i + 1) % len(vertices)],
                                 data=data.get(i), limits=limits.get(i, (None, None)),
                                 curve=curves.get(i), samples=samples))
        return cls(params=params, arcs=tuple(arcs))

    @property
    def vertices(self):
        return np.array([a.start for a in self.arcs])

    @property
    def kinds(self):
        return "".join(a.kind for a in self.arcs)

    def boundary_polyline(self):
        """Closed polyline through all arc samples (first point not repeated)."""
        return np.concatenate([a.points[:-1] for a in self.arcs])

    def orientation(self):
        """+1 when the boundary runs counterclockwise in the model coordinates."""
        p = self.boundary_polyline()
        q = np.roll(p, -1, axis=0)
        return 1 if np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]) > 0 else -1

    def diameter(self):
        p = self.boundary_polyline()
        return float(np.max(np.linalg.norm(p[:, None] - p[None], axis=-1)))

    def endpoint_indices(self):
        """Indices of vertices that are endpoints of some A or B arc, in order."""
        n = len(self.arcs)
        return [i for i in range(n)
                if self.arcs[i].kind in "AB" or self.arcs[i - 1].kind in "AB"]

    def relabel(self, shift=0, swap_ab=False):
        """Cyclically shifted and/or A<->B swapped copy (used by invariance tests)."""
        arcs = list(self.arcs[shift:] + self.arcs[:shift])
        if swap_ab:
            sw = {"A": "B", "B": "A", "C": "C"}
            arcs = [replace(a, kind=sw[a.kind]) for a in arcs]
        return DomainSpec(self.params, tuple(arcs))


def _segments_intersect(p1, p2, q1, q2):
    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - \
               (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def validate_domain(spec, require_alternation=True):
    """Check that ``spec`` bounds a convex Jordan domain with usable labels; return it.

    Convexity is certified by a supporting geodesic at every boundary sample:
    after moving the sample to the origin by an isometry, all other boundary
    points must lie in a closed half-plane through the origin.
    """
    arcs = spec.arcs
    n = len(arcs)
    if n < 2:
        raise DomainError("non-jordan-boundary", "need at least two arcs")
    for i, arc in enumerate(arcs):
        nxt = arcs[(i + 1) % n]
        if np.linalg.norm(arc.end - nxt.start) > DEFAULTS.endpoint_atol:
            raise DomainError("non-jordan-boundary",
                              f"arc {i} does not end where arc {(i + 1) % n} starts",
                              where=("arc", i))
        if arc.kind not in KINDS:
            raise DomainError("bad-data", f"arc {i} has kind {arc.kind!r}", where=("arc", i))
        if arc.kind == "C":
            for lim in (arc.start_limit, arc.end_limit):
                if isinstance(lim, tuple) and (len(lim) != 2 or lim[0] > lim[1]):
                    raise DomainError("bad-data", f"arc {i} has a malformed liminf/limsup pair",
                                      where=("arc", i))
    if require_alternation:
        for i in range(n):
            a, b = arcs[i - 1].kind, arcs[i].kind
            if a == b and a in "AB":
                raise DomainError("adjacent-same-label",
                                  f"two {a} arcs share vertex {i} at {arcs[i].start.tolist()}",
                                  where=("vertex", i))

    poly = spec.boundary_polyline()
    m = len(poly)
    if len(np.unique(np.round(poly / DEFAULTS.endpoint_atol))) < 3:
        raise DomainError("non-jordan-boundary", "boundary is degenerate")
    # simple closed curve: non-adjacent edges must not cross
    a, b = poly, np.roll(poly, -1, axis=0)
    hit = _segments_intersect(a[:, None], b[:, None], a[None], b[None])
    idx = np.arange(m)
    adjacent = (np.abs(idx[:, None] - idx[None]) <= 1) | (np.abs(idx[:, None] - idx[None]) == m - 1)
    hit &= ~adjacent
    if np.any(hit):
        k = int(np.argwhere(hit)[0, 0])
        raise DomainError("non-jordan-boundary", f"boundary crosses itself near {poly[k].tolist()}",
                          where=("point", poly[k].tolist()))

    tol = DEFAULTS.convexity_atol
    owner = np.concatenate([np.full(len(arc.points) - 1, i) for i, arc in enumerate(arcs)])
    for k in range(m):
        moved = move_to_origin(spec.params, poly[k], np.delete(poly, k, axis=0))
        r = np.hypot(moved[:, 0], moved[:, 1])
        ang = np.sort(np.arctan2(moved[r > tol, 1], moved[r > tol, 0]))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() < np.pi - tol:
            vertex_hits = [i for i, arc in enumerate(arcs)
                           if np.linalg.norm(arc.start - poly[k]) <= DEFAULTS.endpoint_atol]
            where = ("vertex", vertex_hits[0]) if vertex_hits else ("arc", int(owner[k]))
            raise DomainError("non-convex-domain",
                              f"no supporting geodesic at {poly[k].tolist()} ({where[0]} {where[1]})",
                              where=where)
    return spec


# --- admissible polygons -----------------------------------------------------------

@dataclass(frozen=True)
class AdmissiblePolygon:
    vertices: tuple           # indices into spec.vertices, in cyclic boundary order
    sides: tuple              # (i, j, tag, length) with tag in {"A", "B", None}


def _side_tag(spec, i, j):
    n = len(spec.arcs)
    if (i + 1) % n == j and spec.arcs[i].kind in "AB":
        return spec.arcs[i].kind, spec.arcs[i].length
    if (j + 1) % n == i and spec.arcs[j].kind in "AB":
        return spec.arcs[j].kind, spec.arcs[j].length
    return None, None


def make_polygon(spec, vertices):
    vertices = tuple(int(v) for v in vertices)
    allowed = set(spec.endpoint_indices())
    if len(vertices) < 3 or len(set(vertices)) != len(vertices):
        raise PolygonNotAdmissibleError("an admissible polygon needs at least 3 distinct vertices")
    if not set(vertices) <= allowed:
        bad = sorted(set(vertices) - allowed)
        raise PolygonNotAdmissibleError(f"vertices {bad} are not endpoints of A or B arcs")
    k = int(np.argmin(vertices))
    rot = vertices[k:] + vertices[:k]
    if list(rot) != sorted(rot):
        raise PolygonNotAdmissibleError("polygon vertices must follow the boundary's cyclic order")
    verts = spec.vertices
    sides = []
    for a, b in zip(vertices, vertices[1:] + vertices[:1]):
        tag, length = _side_tag(spec, a, b)
        if length is None:
            length = float(base_distance(spec.params, verts[a], verts[b]))
        sides.append((a, b, tag, length))
    return AdmissiblePolygon(vertices=vertices, sides=tuple(sides))


def polygon_measures(spec, polygon):
    """(alpha, beta, gamma): total A length, total B length and perimeter."""
    if not isinstance(polygon, AdmissiblePolygon):
        polygon = make_polygon(spec, polygon)
    alpha = sum(s[3] for s in polygon.sides if s[2] == "A")
    beta = sum(s[3] for s in polygon.sides if s[2] == "B")
    gamma = sum(s[3] for s in polygon.sides)
    return alpha, beta, gamma


def _enumerate(spec, max_count):
    ends = spec.endpoint_indices()
    out = []
    for size in range(3, len(ends) + 1):
        for combo in itertools.combinations(ends, size):
            if len(out) >= max_count:
                return out, True
            out.append(make_polygon(spec, combo))
    return out, False


def enumerate_admissible_polygons(spec, max_count=None):
    """All cyclic subsets of >= 3 A/B endpoints, by size then lexicographically."""
    max_count = DEFAULTS.enumeration_cap if max_count is None else max_count
    polys, truncated = _enumerate(spec, max_count)
    if truncated:
        warnings.warn(f"polygon enumeration truncated at {max_count} polygons", RuntimeWarning,
                      stacklevel=2)
    return polys


def polygon_count(k):
    """Number of admissible polygons on k endpoints in convex position."""
    return 2**k - 1 - k - k * (k - 1) // 2


@dataclass(frozen=True)
class Witness:
    polygon: tuple
    alpha: float
    beta: float
    gamma: float
    violated: str


@dataclass(frozen=True)
class SolvabilityVerdict:
    solvable: bool
    witnesses: tuple
    balance: Optional[tuple]       # (alpha(Gamma), beta(Gamma)) when there are no C arcs
    inconclusive: bool = False
    marginal: tuple = ()
    polygons_checked: int = 0
    label_violations: tuple = ()

    def swapped(self):
        """The verdict expected after exchanging the A and B labels."""
        sw = {"2alpha<gamma": "2beta<gamma", "2beta<gamma": "2alpha<gamma"}
        wit = tuple(Witness(w.polygon, w.beta, w.alpha, w.gamma, sw.get(w.violated, w.violated))
                    for w in self.witnesses)
        bal = None if self.balance is None else self.balance[::-1]
        return replace(self, witnesses=wit, balance=bal)


def check_jenkins_serrin(spec, max_count=None):
    """Decide solvability of the Jenkins-Serrin problem on ``spec``.

    With C arcs: 2 alpha(P) < gamma(P) and 2 beta(P) < gamma(P) for every
    admissible P.  Without C arcs: alpha(Gamma) = beta(Gamma) and the strict
    inequalities for every P other than Gamma.  Geometry is validated; two
    adjacent arcs with the same label are reported as a violation rather than
    raised, so that the verdict can still show the balance.
    """
    validate_domain(spec, require_alternation=False)
    max_count = DEFAULTS.enumeration_cap if max_count is None else max_count
    n = len(spec.arcs)
    labels = tuple(i for i in range(n)
                   if spec.arcs[i].kind in "AB" and spec.arcs[i - 1].kind == spec.arcs[i].kind)
    has_c = "C" in spec.kinds
    polys, truncated = _enumerate(spec, max_count)
    full = tuple(range(n))
    witnesses, marginal = [], []
    balance = None
    if not has_c:
        a_tot = sum(a.length for a in spec.arcs if a.kind == "A")
        b_tot = sum(a.length for a in spec.arcs if a.kind == "B")
        balance = (a_tot, b_tot)
        if abs(a_tot - b_tot) > DEFAULTS.balance_rtol * (a_tot + b_tot):
            witnesses.append(Witness(full, a_tot, b_tot, a_tot + b_tot, "alpha(Gamma)=beta(Gamma)"))
    for poly in polys:
        if not has_c and poly.vertices == full:
            continue
        alpha, beta, gamma = polygon_measures(spec, poly)
        for value, name in ((alpha, "2alpha<gamma"), (beta, "2beta<gamma")):
            if not 2 * value < gamma:
                witnesses.append(Witness(poly.vertices, alpha, beta, gamma, name))
            if abs(gamma - 2 * value) <= DEFAULTS.marginal_atol * gamma:
                marginal.append((poly.vertices, name))
    solvable = not witnesses and not labels
    return SolvabilityVerdict(
        solvable=solvable and not truncated,
        witnesses=tuple(witnesses),
        balance=balance,
        inconclusive=truncated and solvable,
        marginal=tuple(marginal),
        polygons_checked=len(polys),
        label_violations=labels,
    )


# --- truncation of the boundary data --------------------------------------------

def _collar_end(h, alpha, lo, hi, from_left):
    """Point of (lo, hi] (or [lo, hi)) nearest the far end where h equals alpha."""
    s = np.linspace(lo, hi, 4097)[1:] if from_left else np.linspace(lo, hi, 4097)[:-1]
    f = h(s) - alpha
    sign = np.sign(f)
    if from_left:
        # scan from hi towards the endpoint at lo
        for k in range(len(s) - 1, 0, -1):
            if sign[k] == 0:
                return s[k]
            if sign[k] * sign[k - 1] < 0:
                return brentq(lambda x: h(np.array([x]))[0] - alpha, s[k - 1], s[k])
    else:
        for k in range(len(s) - 1):
            if sign[k] == 0:
                return s[k]
            if sign[k] * sign[k + 1] < 0:
                return brentq(lambda x: h(np.array([x]))[0] - alpha, s[k], s[k + 1])
    return None


def regularize_data(arc, n):
    """Bounded continuous data g_{k,n} on a C arc.

    Values are clamped to [-n, n].  At an endpoint where the data has no limit
    (given as a (liminf, limsup) pair) the function is replaced, on a collar of
    arc length at most 1/n, by the midpoint value alpha of the clamped liminf
    and limsup; the collar ends at a point where the clamped data equals alpha
    so the result stays continuous.  Infinite limits become +-n.
    """
    if arc.kind != "C":
        raise ValueError("only C arcs carry data to regularize")
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    g, L = arc.data, arc.length

    def clamp(s):
        return np.clip(np.asarray(g(s), float), -n, n)

    limits = []
    collars = []
    for lim, at_start in ((arc.start_limit, True), (arc.end_limit, False)):
        if isinstance(lim, tuple):
            alpha = 0.5 * (float(np.clip(lim[0], -n, n)) + float(np.clip(lim[1], -n, n)))
            width = min(1.0 / n, 0.5 * L)
            lo, hi = (0.0, width) if at_start else (L - width, L)
            p = _collar_end(clamp, alpha, lo, hi, from_left=at_start)
            if p is None:
                # no crossing inside the collar: bridge linearly to the data
                edge = hi if at_start else lo
                collars.append(("ramp", at_start, edge, alpha, float(clamp(np.array([edge]))[0])))
            else:
                collars.append(("flat", at_start, p, alpha, alpha))
            limits.append(alpha)
        else:
            limits.append(float(np.clip(lim, -n, n)))

    def g_n(s):
        s = np.asarray(s, float)
        out = clamp(s)
        for mode, at_start, edge, alpha, v_edge in collars:
            mask = s <= edge if at_start else s >= edge
            if mode == "flat":
                out = np.where(mask, alpha, out)
            else:
                frac = s / edge if at_start else (L - s) / (L - edge)
                out = np.where(mask, alpha + (v_edge - alpha) * frac, out)
        return out

    return replace(arc, data=g_n, start_limit=limits[0], end_limit=limits[1])


@dataclass(frozen=True)
class LiftedBoundary:
    points: np.ndarray          # (M, 3) closed polyline, first point not repeated
    vertical_segments: tuple    # (vertex index, lower height, upper height)


def arc_heights(arc, n, s):
    """Heights of Gamma_n over the arc at parameters ``s``."""
    if arc.kind == "A":
        return np.full(np.shape(s), float(n))
    if arc.kind == "B":
        return np.full(np.shape(s), -float(n))
    return regularize_data(arc, n).values(s)


def boundary_curve_at_level(spec, n):
    """The Jordan curve Gamma_n over the boundary of ``spec``.

    A arcs are lifted to height n, B arcs to -n and C arcs by their
    regularized data; a vertical segment is inserted at every vertex where
    the heights of the two adjacent arcs differ.
    """
    pieces = []
    for arc in spec.arcs:
        s = np.concatenate([[0.0], arc._cumulative()[1:-1], [arc.length]])
        pieces.append(np.column_stack([arc.points, arc_heights(arc, n, s)]))
    pts, vertical = [], []
    k = len(pieces)
    for i, piece in enumerate(pieces):
        prev_end = pieces[i - 1][-1, 2]
        here = piece[0, 2]
        if not np.isclose(prev_end, here, rtol=0, atol=1e-12):
            pts.append(np.array([*piece[0, :2], prev_end]))
            vertical.append((i, float(min(prev_end, here)), float(max(prev_end, here))))
        pts.extend(piece[:-1])
    del k
    return LiftedBoundary(points=np.array(pts), vertical_segments=tuple(vertical))
