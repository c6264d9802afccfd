"""Mesh and report files.

Meshes are Wavefront OBJ files with vertices in model coordinates (x, y, t)
next to a JSON sidecar (``<name>.json``) holding everything the OBJ cannot:
model parameters and boundary bookkeeping plus per-vertex curvature flags.
Floats are written with 17 significant digits so files round-trip exactly.
"""

import math
from pathlib import Path

import numpy as np

from .errors import ProblemFileError
from .geometry import ModelParams
from .mesh import GraphMesh
from .surface import SurfaceMesh

MESH_SCHEMA = "jslab.mesh/1"


def _float(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.17g}"
    # keep floats recognizable as floats when read back
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent=1, _level=0):
    """JSON text with floats at 17 significant digits and sorted keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return _string(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _string(s):
    import json
    return json.dumps(s)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    import json
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc.msg}", location=f"line {exc.lineno}") from exc


# --- OBJ ------------------------------------------------------------------------

def write_obj(path, points, triangles, comment=None):
    lines = [f"# {comment}"] if comment else []
    lines += [f"v {_float(x)} {_float(y)} {_float(t)}" for x, y, t in points]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path):
    pts, tris = [], []
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                pts.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                tris.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
        except ValueError as exc:
            raise ProblemFileError(f"bad OBJ record {line!r}", location=f"{path}:{k}") from exc
    return np.array(pts, float).reshape(-1, 3), np.array(tris, int).reshape(-1, 3)


def _sidecar(path):
    return Path(path).with_suffix(".json")


def save_graph(path, params, mesh, extra=None):
    """OBJ + sidecar for a solved graph; ``load_mesh`` restores the GraphMesh."""
    path = Path(path)
    write_obj(path, np.column_stack([mesh.vertices, mesh.heights]), mesh.triangles)
    side = {
        "schema": MESH_SCHEMA, "kind": "graph",
        "model": {"kappa": params.kappa, "tau": params.tau},
        "h": mesh.h, "loop": mesh.loop.tolist(), "arc_index": mesh.arc_index.tolist(),
        "arc_param": mesh.arc_param.tolist(),
        "jumps": [[int(v), float(a), float(b)] for v, a, b in mesh.jumps],
    }
    if mesh.stats is not None:
        s = mesh.stats
        side["stats"] = {"converged": s.converged, "iterations": s.iterations,
                         "residual": s.residual, "area": s.area}
    side.update(extra or {})
    write_json(_sidecar(path), side)


def _params(side, path):
    try:
        m = side["model"]
        return ModelParams(float(m["kappa"]), float(m["tau"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError("sidecar lacks a valid model block", location=str(path)) from exc


def load_mesh(path):
    """Read an OBJ and its sidecar: (params, GraphMesh or SurfaceMesh, sidecar dict)."""
    path = Path(path)
    pts, tris = read_obj(path)
    side_path = _sidecar(path)
    if not side_path.exists():
        raise ProblemFileError("missing sidecar file", location=str(side_path))
    side = read_json(side_path)
    if side.get("schema") != MESH_SCHEMA:
        raise ProblemFileError(f"expected schema {MESH_SCHEMA}", location=f"{side_path}:schema")
    params = _params(side, side_path)
    if side.get("kind") != "graph":
        return params, SurfaceMesh(pts, tris, float(side.get("h", 0.0))), side
    n = len(pts)
    loop = np.array(side["loop"], int)
    boundary = np.zeros(n, bool)
    boundary[loop] = True
    arc_param = np.array(side["arc_param"], float)
    mesh = GraphMesh(vertices=pts[:, :2].copy(), triangles=tris, boundary=boundary,
                     heights=pts[:, 2].copy(), h=float(side["h"]), loop=loop,
                     arc_index=np.array(side["arc_index"], int), arc_param=arc_param,
                     junction=boundary & (arc_param == 0.0),
                     jumps=tuple((int(v), float(a), float(b)) for v, a, b in side["jumps"]))
    return params, mesh, side


def save_surface(path, params, surface, extra=None, curvature=None):
    """OBJ + sidecar for a triangulated surface, optionally with per-vertex K."""
    path = Path(path)
    write_obj(path, surface.points, surface.triangles)
    side = {"schema": MESH_SCHEMA, "kind": "surface",
            "model": {"kappa": params.kappa, "tau": params.tau}, "h": surface.h}
    if curvature is not None:
        side["curvature"] = curvature.values.tolist()
        side["reliable"] = curvature.reliable.tolist()
    side.update(extra or {})
    write_json(_sidecar(path), side)
