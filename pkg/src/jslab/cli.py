"""Command line front end with one subcommand per pipeline stage.

Exit codes
----------
0   success (``check``: solvable)
1   not solvable (``check``; ``solve`` without ``--force``)
2   inconclusive: polygon enumeration was truncated (``check``)
3   a solve did not converge, or forced probe differences did not settle
4   geometric failure such as an unsupported axis or a seam missing the mesh
64  malformed command line or input file
66  input file missing
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    blowup_rescale,
    curvature_scan,
    euclidean_limit_deviation,
    f_function,
    grow_radius_check,
    normalization_check,
    seam_vertex,
)
from .boundary import check_jenkins_serrin
from .curvature import CurvatureField, gaussian_curvature
from .errors import (
    BallExceedsMeshError,
    InsufficientStencilError,
    NoConvergenceError,
    NoSeamError,
    ProblemFileError,
    SeamPointError,
    UnsupportedAxisError,
)
from .io import load_mesh, read_json, save_graph, save_surface, write_json
from .mesh import GraphMesh, build_mesh
from .problems import load_problem, parse_problem
from .reflection import (
    ReflectionAxis,
    extend_by_reflection,
    isometry_check,
    seam_smoothness_report,
)
from .solver import SolveOptions, run_jenkins_serrin
from .surface import graph_surface

EXIT_OK, EXIT_NOT_SOLVABLE, EXIT_INCONCLUSIVE, EXIT_NO_CONVERGENCE, EXIT_GEOMETRY = 0, 1, 2, 3, 4
EXIT_USAGE, EXIT_NOINPUT = 64, 66
RUN_SCHEMA = "jslab.run/1"
REPORT_SCHEMA = "jslab.report/1"
GEOMETRY_ERRORS = (NoSeamError, UnsupportedAxisError, BallExceedsMeshError, SeamPointError,
                   InsufficientStencilError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _schedule(text):
    try:
        return tuple(int(k) for k in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("schedule is a comma-separated list of integers") from exc


def _axis(text):
    kind, _, rest = text.partition(":")
    try:
        nums = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad axis numbers in {text!r}") from exc
    if kind == "vertical" and len(nums) in (0, 2):
        return ReflectionAxis.vertical(nums or (0.0, 0.0))
    if kind == "horizontal" and len(nums) == 5:
        return ReflectionAxis.horizontal(nums[0:2], nums[2:4], nums[4])
    raise argparse.ArgumentTypeError("axis is vertical[:x,y] or horizontal:x1,y1,x2,y2,level")


def _axis_from_dict(d):
    if d.get("kind") == "vertical":
        return ReflectionAxis.vertical(d.get("point", (0.0, 0.0)))
    if d.get("kind") == "horizontal":
        a, b = d["through"]
        return ReflectionAxis.horizontal(a, b, d.get("level", 0.0))
    raise ProblemFileError(f"unknown axis {d!r}", location="analysis.scans.axis")


def _axis_dict(axis):
    if axis.kind == "vertical":
        return {"kind": "vertical", "point": list(axis.point)}
    return {"kind": "horizontal", "through": [list(p) for p in axis.through], "level": axis.level}


def _verdict_dict(v):
    return {"solvable": v.solvable, "inconclusive": v.inconclusive, "marginal": v.marginal,
            "balance": v.balance, "polygons_checked": v.polygons_checked,
            "label_violations": list(v.label_violations),
            "witnesses": [{"polygon": list(w.polygon), "alpha": w.alpha, "beta": w.beta,
                           "gamma": w.gamma, "violated": w.violated} for w in v.witnesses]}


def _print_verdict(name, v, out):
    state = "inconclusive" if v.inconclusive else ("solvable" if v.solvable else "not solvable")
    print(f"problem: {name}", file=out)
    print(f"verdict: {state}", file=out)
    print(f"polygons checked: {v.polygons_checked}", file=out)
    if v.label_violations:
        print(f"adjacent equal labels at vertices: {list(v.label_violations)}", file=out)
    if v.marginal:
        print("marginal: an inequality holds within 1e-9", file=out)
    for w in v.witnesses:
        print(f"witness: vertices {list(w.polygon)} alpha={w.alpha:.17g} "
              f"beta={w.beta:.17g} gamma={w.gamma:.17g} fails {w.violated}", file=out)


def _exit_for(v):
    if v.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK if v.solvable else EXIT_NOT_SOLVABLE


# --- commands --------------------------------------------------------------------

def cmd_check(args, out=sys.stdout):
    problem = load_problem(args.problem)
    verdict = check_jenkins_serrin(problem.spec)
    _print_verdict(problem.name, verdict, out)
    return _exit_for(verdict)


def _level_stats(sol):
    s = sol.stats
    return {"converged": s.converged, "iterations": s.iterations, "residual": s.residual,
            "area": s.area, "min_height": float(sol.heights.min()),
            "max_height": float(sol.heights.max())}


def cmd_solve(args, out=sys.stdout):
    t0 = time.perf_counter()
    problem = load_problem(args.problem)
    settings = problem.solver
    h = args.h or settings.h
    schedule = args.schedule or settings.schedule
    tol = args.tol or settings.tol
    verdict = check_jenkins_serrin(problem.spec)
    _print_verdict(problem.name, verdict, out)
    if not verdict.solvable and not args.force:
        print("refusing to solve; use --force to run anyway", file=out)
        return _exit_for(verdict)
    dest = Path(args.out)
    dest.mkdir(parents=True, exist_ok=True)
    write_json(dest / "problem.json", problem.source)
    mesh = build_mesh(problem.spec, h, graded_corners=settings.graded_corners,
                      corner_radius=settings.corner_radius)
    t_mesh = time.perf_counter()
    opts = SolveOptions(tol_residual=settings.tol_residual, max_iters=settings.max_iters)
    code = EXIT_OK
    try:
        run = run_jenkins_serrin(problem.spec, mesh, schedule, opts, tol=tol, force=True)
    except NoConvergenceError as exc:
        run = exc.result
        print(f"no convergence: {exc}", file=out)
        code = EXIT_NO_CONVERGENCE
    t_solve = time.perf_counter()
    levels = []
    for n, sol in zip(run.schedule, run.solutions):
        save_graph(dest / f"level_{n}.obj", problem.params, sol, {"level": n})
        levels.append({"level": n, **_level_stats(sol)})
    if run.solutions:
        save_graph(dest / "final.obj", problem.params, run.solutions[-1],
                   {"level": run.schedule[-1]})
    log = [{"from": a, "to": b, "probe_sup_difference": list(d)}
           for a, b, d in zip(run.schedule, run.schedule[1:], run.convergence_log)]
    for row in log:
        print(f"levels {row['from']}->{row['to']}: probe sup difference "
              + ", ".join(f"{d:.6g}" for d in row["probe_sup_difference"]), file=out)
    if code == EXIT_OK and not run.converged:
        print(f"probe differences did not fall below {tol}", file=out)
        code = EXIT_NO_CONVERGENCE
    write_json(dest / "run.json", {
        "schema": RUN_SCHEMA, "problem": problem.name, "h": h, "schedule": list(run.schedule),
        "tol": tol, "forced": bool(args.force and not verdict.solvable),
        "verdict": _verdict_dict(verdict), "levels": levels, "convergence_log": log,
        "converged": run.converged and code == EXIT_OK, "n_vertices": mesh.n_vertices,
        "probes": [{"center": list(p.center), "radius": p.radius, "vertices": len(p.vertices)}
                   for p in run.probes]})
    write_json(dest / "timings.json", {"mesh_seconds": t_mesh - t0, "solve_seconds": t_solve - t_mesh,
                                       "total_seconds": time.perf_counter() - t0})
    print(f"wrote {len(run.solutions)} level meshes to {dest}", file=out)
    return code


def _report_dict(report):
    return {"c0_gap": report.c0_gap, "normal_kink_max": report.normal_kink_max,
            "curvature_jump_max": report.curvature_jump_max, "seam_vertices": report.seam_vertices}


def cmd_reflect(args, out=sys.stdout):
    params, mesh, _ = load_mesh(args.solution)
    if not isinstance(mesh, GraphMesh):
        raise ProblemFileError("reflect needs a solved graph mesh", location=str(args.solution))
    ext = extend_by_reflection(params, mesh, args.axis)
    report = seam_smoothness_report(params, ext)
    dest = Path(args.out)
    dest.mkdir(parents=True, exist_ok=True)
    save_surface(dest / "extended.obj", params, ext.surface,
                 {"seam": ext.seam.tolist(), "half": ext.half.tolist(), "flipped": ext.flipped,
                  "axis": _axis_dict(args.axis)})
    body = {"schema": REPORT_SCHEMA, "axis": _axis_dict(args.axis), "seam": _report_dict(report),
            "manifold": ext.surface.is_manifold(),
            "isometry_distortion": isometry_check(params, args.axis, seed=args.seed),
            "seed": args.seed}
    write_json(dest / "seam_report.json", body)
    print(f"seam vertices: {report.seam_vertices}", file=out)
    print(f"C0 gap: {report.c0_gap:.6g}", file=out)
    print(f"normal kink max: {report.normal_kink_max:.6g} rad", file=out)
    print(f"curvature jump max: {report.curvature_jump_max:.6g}", file=out)
    return EXIT_OK


def _synthetic_field(surface, level):
    n = len(surface.points)
    bnd = surface.boundary_vertices()
    return CurvatureField(values=np.full(n, float(level) ** 2), reliable=~bnd,
                          stencil_radius=np.full(n, np.nan))


def _scan(params, run, levels, meshes, scan, analysis):
    axis = _axis_from_dict(scan["axis"])
    point = tuple(float(v) for v in scan["point"])
    radius = float(scan["radius"])
    exts = [extend_by_reflection(params, m, axis) for m in meshes]
    result = {"axis": _axis_dict(axis), "seam": [_report_dict(seam_smoothness_report(params, e))
                                                 for e in exts]}
    sc = curvature_scan(levels, exts, point, radius)
    result["scan"] = sc.summary()
    c = float(analysis.get("f_radius", radius))
    synthetic = analysis.get("synthetic_curvature")
    f_max, frames = [], []
    for n, ext, v in zip(levels, exts, sc.seam_vertex):
        if synthetic == "level_squared":
            field = _synthetic_field(ext.surface, n)
        elif synthetic is None:
            field = gaussian_curvature(params, ext.surface)
        else:
            raise ProblemFileError(f"unknown synthetic curvature {synthetic!r}",
                                   location="analysis.synthetic_curvature")
        f = f_function(params, ext.surface, field, v, c)
        f_max.append(f.maximum)
        frame = {"level": n, "argmax": ext.surface.points[f.argmax].tolist(), "f_max": f.maximum,
                 "degenerate": f.degenerate}
        k = field.values[f.argmax]
        if not f.degenerate and k != 0:
            lam = float(np.sqrt(abs(k)))
            rho = f.maximum / lam
            b = blowup_rescale(params, ext.surface, field, lam, rho=rho)
            frame.update({"lambda": lam, "rho_tilde": b.rho_tilde,
                          "rescaled_k_at_argmax": float(b.field.values[f.argmax])})
            if synthetic is None:
                frame["normalization"] = normalization_check(b, f.argmax)
            if lam > 0.5:
                frame["euclidean_deviation_r1"] = euclidean_limit_deviation(
                    lam, params.tau, 1.0, kappa=params.kappa)
        frames.append(frame)
    g = grow_radius_check(levels, f_max, c)
    result["blowup"] = frames
    result["growth"] = {"levels": list(g.levels), "f_max": list(g.f_max),
                        "rho_tilde": list(g.rho_tilde), "radius": g.radius}
    return result


def cmd_analyze(args, out=sys.stdout):
    run_dir = Path(args.run)
    run = read_json(run_dir / "run.json")
    if run.get("schema") != RUN_SCHEMA:
        raise ProblemFileError(f"expected schema {RUN_SCHEMA}", location=str(run_dir / "run.json"))
    problem = parse_problem(read_json(run_dir / "problem.json"), str(run_dir / "problem.json"))
    analysis = read_json(args.spec) if args.spec else problem.analysis
    levels = list(run["schedule"])
    report = {"schema": REPORT_SCHEMA, "version": __version__, "problem": run["problem"],
              "verdict": run["verdict"], "levels": run["levels"],
              "convergence_log": run["convergence_log"], "scans": []}
    t0 = time.perf_counter()
    scans = analysis.get("scans", [])
    if scans:
        meshes = []
        for n in levels:
            params, mesh, _ = load_mesh(run_dir / f"level_{n}.obj")
            meshes.append(mesh)
        for scan in scans:
            report["scans"].append(_scan(params, run, levels, meshes, scan, analysis))
    dest = Path(args.out) if args.out else run_dir / "report.json"
    write_json(dest, report)
    write_json(dest.with_name(dest.stem + ".timings.json"),
               {"analyze_seconds": time.perf_counter() - t0})
    for s in report["scans"]:
        sc = s["scan"]
        status = "PASS" if sc["passed"] else "FAIL"
        if sc["insufficient_levels"]:
            status += " (insufficient levels)"
        print(f"scan at {sc['point']} radius {sc['radius']}: sup|K| "
              + ", ".join(f"{v:.6g}" for v in sc["sup_abs_k"]) + f" -> {status}", file=out)
    print(f"wrote {dest}", file=out)
    return EXIT_OK


def cmd_export(args, out=sys.stdout):
    params, mesh, side = load_mesh(args.mesh)
    if isinstance(mesh, GraphMesh):
        surface, _ = graph_surface(mesh)
    else:
        surface = mesh
    field = gaussian_curvature(params, surface)
    keep = {k: side[k] for k in ("level", "axis", "flipped") if k in side}
    save_surface(args.out, params, surface, keep, curvature=field)
    finite = np.isfinite(field.values) & field.reliable
    print(f"wrote {args.out} with {int(finite.sum())} reliable curvature values", file=out)
    return EXIT_OK


# --- entry point -----------------------------------------------------------------

def build_parser():
    p = _Parser(prog="jslab", description="Jenkins-Serrin graphs in E(kappa, tau).")
    p.add_argument("--version", action="version", version=f"jslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="test the solvability conditions")
    c.add_argument("problem")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", help="solve the truncation sequence")
    s.add_argument("problem")
    s.add_argument("--out", required=True)
    s.add_argument("--h", type=float)
    s.add_argument("--schedule", type=_schedule)
    s.add_argument("--tol", type=float)
    s.add_argument("--force", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reflect", help="extend a solved mesh by a reflection")
    r.add_argument("solution")
    r.add_argument("--axis", type=_axis, required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_reflect)

    a = sub.add_parser("analyze", help="curvature scans and blow-up diagnostics of a run")
    a.add_argument("run")
    a.add_argument("--spec", help="analysis JSON; defaults to the problem's analysis block")
    a.add_argument("--out")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("export", help="write a mesh with per-vertex curvature")
    e.add_argument("mesh")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except FileNotFoundError as exc:
        print(f"jslab: missing input: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except ProblemFileError as exc:
        print(f"jslab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GEOMETRY_ERRORS as exc:
        print(f"jslab: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
