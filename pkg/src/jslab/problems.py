"""Problem files (JSON, schema ``jslab.problem/1``) and the shipped examples.

Layout::

    {
      "schema": "jslab.problem/1",
      "name": "scherk",
      "model": {"kappa": 0, "tau": 0},
      "vertices": [[x, y], ...],
      "arcs": [{"kind": "A", "from": 0, "to": 1}, ...],
      "solver": {"h": 0.02, "schedule": [1, 2, 3, 4, 5], "tol": 0.01},
      "analysis": {"scans": [...], "f_radius": 0.3}
    }

Arc ``i`` must run from vertex ``i`` to vertex ``i + 1`` (cyclically).  C arcs
take ``data`` as a number, ``{"table": [[s, value], ...]}`` (piecewise linear
in arc length), or ``{"expression": id, ...}`` with id one of ``constant``
(``value``), ``linear`` (``start``, ``end`` over the arc) or ``scherk``
(log(cos y / cos x) at the arc point).  ``limits`` gives the one-sided limits
at the arc ends: null, a number, ``"+inf"``/``"-inf"``, or a
``[liminf, limsup]`` pair for data without a limit.  ``curve`` optionally
replaces the geodesic by a polyline.
"""

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .boundary import DomainSpec, make_arc, validate_domain
from .errors import DomainError, JSLabError, ProblemFileError
from .geometry import ModelParams
from .io import read_json

PROBLEM_SCHEMA = "jslab.problem/1"
SHIPPED = ("scherk", "hyperbolic_quad", "psl2_origin", "long_rectangle", "all_a_square")


@dataclass(frozen=True)
class SolverSettings:
    h: float = 0.05
    schedule: tuple = (1, 2, 3, 4, 5)
    tol: float = 1e-2
    tol_residual: float = 1e-10
    max_iters: int = 200
    graded_corners: tuple = ()
    corner_radius: float = 0.25


@dataclass(frozen=True)
class Problem:
    name: str
    spec: DomainSpec
    solver: SolverSettings
    analysis: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    @property
    def params(self):
        return self.spec.params


def _limit(value, where):
    if value is None:
        return None
    if isinstance(value, str):
        if value in ("+inf", "inf"):
            return np.inf
        if value == "-inf":
            return -np.inf
        raise ProblemFileError(f"unknown limit {value!r}", location=where)
    if isinstance(value, list):
        if len(value) != 2:
            raise ProblemFileError("a limit pair needs [liminf, limsup]", location=where)
        return (float(_limit(value[0], where)), float(_limit(value[1], where)))
    return float(value)


def _data(raw, where):
    """Data as a constant or a callable f(s, length, points)."""
    if isinstance(raw, (int, float)):
        return float(raw)
    if not isinstance(raw, dict):
        raise ProblemFileError("data must be a number or an object", location=where)
    if "table" in raw:
        tab = np.asarray(raw["table"], float)
        if tab.ndim != 2 or tab.shape[1] != 2 or len(tab) < 2 or np.any(np.diff(tab[:, 0]) <= 0):
            raise ProblemFileError("table needs increasing [s, value] rows", location=where + ".table")
        return lambda s, L, pts: np.interp(s, tab[:, 0], tab[:, 1])
    expr = raw.get("expression")
    try:
        if expr == "constant":
            return float(raw["value"])
        if expr == "linear":
            a, b = float(raw["start"]), float(raw["end"])
            return lambda s, L, pts: a + (b - a) * s / L
    except KeyError as exc:
        raise ProblemFileError(f"expression {expr!r} needs {exc}", location=where) from exc
    if expr == "scherk":
        return lambda s, L, pts: np.log(np.cos(pts[..., 1]) / np.cos(pts[..., 0]))
    raise ProblemFileError(f"unknown data expression {expr!r}", location=where + ".expression")


def _build_arc(params, kind, start, end, raw, where):
    limits = raw.get("limits", [None, None])
    if not isinstance(limits, list) or len(limits) != 2:
        raise ProblemFileError("limits must be a two-element list", location=where + ".limits")
    limits = (_limit(limits[0], where + ".limits[0]"), _limit(limits[1], where + ".limits[1]"))
    curve = raw.get("curve")
    if kind in "AB":
        for key in ("data", "curve"):
            if key in raw:
                raise ProblemFileError(f"{kind} arcs take no {key}", location=f"{where}.{key}")
        return make_arc(params, kind, start, end)
    if "data" not in raw:
        raise ProblemFileError("C arcs need data", location=where + ".data")
    data = _data(raw["data"], where + ".data")
    if isinstance(data, float):
        return make_arc(params, kind, start, end, data=data, limits=limits, curve=curve)
    base = make_arc(params, kind, start, end, data=0.0, curve=curve)

    def func(s, f=data, arc=base):
        s = np.asarray(s, float)
        return f(s, arc.length, arc.point_at(s))

    return make_arc(params, kind, start, end, data=func, limits=limits, curve=curve)


def parse_problem(raw, origin="<problem>"):
    """Build a :class:`Problem` from a decoded JSON object."""
    if not isinstance(raw, dict):
        raise ProblemFileError("top level must be an object", location=origin)
    if raw.get("schema") != PROBLEM_SCHEMA:
        raise ProblemFileError(f"schema must be {PROBLEM_SCHEMA!r}", location=f"{origin}:schema")
    try:
        model = raw["model"]
        params = ModelParams(float(model["kappa"]), float(model.get("tau", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError(f"bad model block: {exc}", location=f"{origin}:model") from exc
    try:
        vertices = np.asarray(raw["vertices"], float)
    except (KeyError, ValueError) as exc:
        raise ProblemFileError("vertices must be a list of [x, y]",
                               location=f"{origin}:vertices") from exc
    if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:
        raise ProblemFileError("vertices must be a list of [x, y]", location=f"{origin}:vertices")
    arcs_raw = raw.get("arcs")
    if not isinstance(arcs_raw, list) or len(arcs_raw) != len(vertices):
        raise ProblemFileError("need exactly one arc per vertex", location=f"{origin}:arcs")
    arcs = []
    n = len(vertices)
    for i, a in enumerate(arcs_raw):
        where = f"{origin}:arcs[{i}]"
        if not isinstance(a, dict):
            raise ProblemFileError("arc must be an object", location=where)
        kind = a.get("kind")
        if kind not in ("A", "B", "C"):
            raise ProblemFileError(f"kind must be A, B or C, got {kind!r}", location=where + ".kind")
        if a.get("from", i) != i or a.get("to", (i + 1) % n) != (i + 1) % n:
            raise ProblemFileError(f"arc {i} must join vertex {i} to vertex {(i + 1) % n}",
                                   location=where)
        try:
            arcs.append(_build_arc(params, kind, vertices[i], vertices[(i + 1) % n], a, where))
        except ProblemFileError:
            raise
        except (JSLabError, KeyError, TypeError, ValueError) as exc:
            raise ProblemFileError(str(exc), location=where) from exc
    spec = DomainSpec(params=params, arcs=tuple(arcs))
    try:
        # adjacent equal labels are reported by the checker, not rejected here
        validate_domain(spec, require_alternation=False)
    except DomainError as exc:
        loc = f"{origin}:arcs[{exc.where}]" if exc.where is not None else f"{origin}:arcs"
        raise ProblemFileError(str(exc), location=loc) from exc

    s = raw.get("solver", {})
    try:
        solver = SolverSettings(
            h=float(s.get("h", SolverSettings.h)),
            schedule=tuple(int(k) for k in s.get("schedule", SolverSettings.schedule)),
            tol=float(s.get("tol", SolverSettings.tol)),
            tol_residual=float(s.get("tol_residual", SolverSettings.tol_residual)),
            max_iters=int(s.get("max_iters", SolverSettings.max_iters)),
            graded_corners=tuple(int(k) for k in s.get("graded_corners", ())),
            corner_radius=float(s.get("corner_radius", SolverSettings.corner_radius)))
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"bad solver block: {exc}", location=f"{origin}:solver") from exc
    if not solver.h > 0:
        raise ProblemFileError("h must be positive", location=f"{origin}:solver.h")
    analysis = raw.get("analysis", {})
    if not isinstance(analysis, dict):
        raise ProblemFileError("analysis must be an object", location=f"{origin}:analysis")
    return Problem(name=str(raw.get("name", Path(origin).stem)), spec=spec, solver=solver,
                   analysis=analysis, source=raw)


def load_problem(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    return parse_problem(read_json(path), origin=str(path))


def shipped_problem_path(name):
    if name not in SHIPPED:
        raise KeyError(f"unknown shipped problem {name!r}; choose from {SHIPPED}")
    return Path(str(resources.files("jslab") / "problems" / f"{name}.json"))


def shipped_problem(name):
    return load_problem(shipped_problem_path(name))
