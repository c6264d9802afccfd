import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jslab.cli import main
from jslab.errors import ProblemFileError
from jslab.geometry import ModelParams
from jslab.io import dumps, load_mesh, read_obj, save_graph, save_surface, write_obj
from jslab.mesh import GraphMesh, build_mesh
from jslab.problems import load_problem, parse_problem, shipped_problem_path
from jslab.solver import solve_truncated_level
from jslab.surface import SurfaceMesh


def problem_dict(name):
    return json.loads(shipped_problem_path(name).read_text())


class TestFormats:
    @given(st.floats(allow_nan=False))
    def test_float_round_trip(self, x):
        assert json.loads(dumps(x)) == x
        assert isinstance(json.loads(dumps(x)), float)

    def test_nested(self):
        obj = {"b": [1, 2.5, None, True], "a": {"x": np.float64(0.0), "y": np.int64(3)}}
        text = dumps(obj)
        assert json.loads(text) == {"a": {"x": 0.0, "y": 3}, "b": [1, 2.5, None, True]}
        assert text.index('"a"') < text.index('"b"')

    def test_obj_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(20, 3)) * 10 ** rng.uniform(-8, 3, size=(20, 1))
        tris = rng.integers(0, 20, size=(15, 3))
        write_obj(tmp_path / "m.obj", pts, tris, comment="test")
        p2, t2 = read_obj(tmp_path / "m.obj")
        np.testing.assert_array_equal(p2, pts)
        np.testing.assert_array_equal(t2, tris)

    def test_graph_round_trip(self, tmp_path, unit_square_abab):
        mesh = build_mesh(unit_square_abab, 0.1)
        sol = solve_truncated_level(unit_square_abab, mesh, 2)
        params = ModelParams()
        save_graph(tmp_path / "g.obj", params, sol, {"level": 2})
        p2, m2, side = load_mesh(tmp_path / "g.obj")
        assert p2 == params and isinstance(m2, GraphMesh) and side["level"] == 2
        for name in ("vertices", "triangles", "heights", "loop", "arc_index", "arc_param",
                     "boundary", "junction"):
            np.testing.assert_array_equal(getattr(m2, name), getattr(sol, name))
        assert m2.jumps == sol.jumps

    def test_surface_round_trip(self, tmp_path):
        surf = SurfaceMesh(np.eye(3), np.array([[0, 1, 2]]), 0.5)
        save_surface(tmp_path / "s.obj", ModelParams(-1.0, 1.0), surf)
        params, s2, _ = load_mesh(tmp_path / "s.obj")
        assert params == ModelParams(-1.0, 1.0)
        np.testing.assert_array_equal(s2.points, surf.points)

    def test_missing_sidecar(self, tmp_path):
        write_obj(tmp_path / "lonely.obj", np.eye(3), [[0, 1, 2]])
        with pytest.raises(ProblemFileError):
            load_mesh(tmp_path / "lonely.obj")

    def test_bad_obj_record(self, tmp_path):
        (tmp_path / "bad.obj").write_text("v 1 2 x\n")
        with pytest.raises(ProblemFileError) as err:
            read_obj(tmp_path / "bad.obj")
        assert err.value.location.endswith(":1")


class TestProblemFiles:
    @pytest.mark.parametrize("name", ["scherk", "hyperbolic_quad", "psl2_origin",
                                      "long_rectangle", "all_a_square"])
    def test_shipped(self, name):
        prob = load_problem(shipped_problem_path(name))
        assert len(prob.spec.arcs) == len(prob.source["vertices"])

    def test_bad_kind_located(self):
        raw = problem_dict("scherk")
        raw["arcs"][1]["kind"] = "D"
        with pytest.raises(ProblemFileError) as err:
            parse_problem(raw, "p.json")
        assert err.value.location == "p.json:arcs[1].kind"

    @pytest.mark.parametrize("edit,where", [
        (lambda r: r.update(schema="other"), "schema"),
        (lambda r: r["model"].pop("kappa"), "model"),
        (lambda r: r["arcs"].pop(), "arcs"),
        (lambda r: r["arcs"][0].update(data=1.0), "arcs[0].data"),
        (lambda r: r["arcs"][2].update({"from": 3}), "arcs[2]"),
        (lambda r: r["solver"].update(h=-1), "solver.h"),
    ])
    def test_located_errors(self, edit, where):
        raw = problem_dict("scherk")
        edit(raw)
        with pytest.raises(ProblemFileError) as err:
            parse_problem(raw, "p.json")
        assert err.value.location == f"p.json:{where}"

    def test_data_forms(self):
        raw = problem_dict("long_rectangle")
        raw["arcs"][1]["data"] = {"table": [[0, 0.0], [0.5, 1.0]]}
        raw["arcs"][3]["data"] = {"expression": "linear", "start": 2.0, "end": 4.0}
        prob = parse_problem(raw)
        assert prob.spec.arcs[1].values(np.array([0.25]))[0] == pytest.approx(0.5)
        assert prob.spec.arcs[3].values(np.array([0.25]))[0] == pytest.approx(3.0)

    def test_scherk_expression(self):
        raw = problem_dict("hyperbolic_quad")
        raw["model"] = {"kappa": 0.0, "tau": 0.0}
        raw["vertices"] = [[-1, -1], [1, -1], [1, 1], [-1, 1]]
        raw["arcs"] = [{"kind": "C", "data": {"expression": "scherk"}} for _ in range(4)]
        arc = parse_problem(raw).spec.arcs[0]
        np.testing.assert_allclose(arc.values(np.array([1.0])), [np.log(np.cos(-1) / np.cos(0))])


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestCli:
    def test_check_codes(self, capsys):
        assert run_cli("check", shipped_problem_path("scherk")) == 0
        assert "verdict: solvable" in capsys.readouterr().out
        assert run_cli("check", shipped_problem_path("long_rectangle")) == 1
        out = capsys.readouterr().out
        assert "fails 2alpha<gamma" in out and "alpha=4 " in out and "gamma=5 " in out
        assert run_cli("check", shipped_problem_path("all_a_square")) == 1
        assert "alpha(Gamma)=beta(Gamma)" in capsys.readouterr().out

    def test_input_errors(self, tmp_path, capsys):
        assert run_cli("check", tmp_path / "nope.json") == 66
        (tmp_path / "broken.json").write_text("{ not json")
        assert run_cli("check", tmp_path / "broken.json") == 64
        raw = problem_dict("scherk")
        raw["arcs"][1]["kind"] = "D"
        (tmp_path / "kind.json").write_text(json.dumps(raw))
        assert run_cli("check", tmp_path / "kind.json") == 64
        assert "arcs[1].kind" in capsys.readouterr().err
        with pytest.raises(SystemExit) as err:
            run_cli("frobnicate")
        assert err.value.code == 64
        with pytest.raises(SystemExit) as err:
            run_cli("reflect", "x.obj", "--axis", "diagonal", "--out", tmp_path)
        assert err.value.code == 64

    def test_refuses_unsolvable(self, tmp_path, capsys):
        assert run_cli("solve", shipped_problem_path("long_rectangle"), "--out", tmp_path / "r") == 1
        assert "refusing" in capsys.readouterr().out
        code = run_cli("solve", shipped_problem_path("long_rectangle"), "--out", tmp_path / "f",
                       "--force", "--h", 0.1, "--schedule", "1,2,3")
        assert code == 3
        run = json.loads((tmp_path / "f" / "run.json").read_text())
        assert run["forced"] and not run["converged"]

    def test_pipeline(self, tmp_path, capsys):
        out = tmp_path / "quad"
        assert run_cli("solve", shipped_problem_path("hyperbolic_quad"), "--out", out) == 0
        run = json.loads((out / "run.json").read_text())
        assert run["schema"] == "jslab.run/1" and run["schedule"] == [1, 2, 3, 4, 5]
        assert all(lv["converged"] for lv in run["levels"])
        diffs = [row["probe_sup_difference"][0] for row in run["convergence_log"]]
        assert all(b < a for a, b in zip(diffs, diffs[1:]))

        assert run_cli("reflect", out / "level_5.obj", "--axis", "vertical:1,0",
                       "--out", tmp_path / "ext") == 0
        seam = json.loads((tmp_path / "ext" / "seam_report.json").read_text())
        assert seam["manifold"] and seam["seam"]["normal_kink_max"] < 0.05
        assert seam["isometry_distortion"] <= 1e-8

        assert run_cli("export", tmp_path / "ext" / "extended.obj", "--out", tmp_path / "k.obj") == 0
        _, surf, side = load_mesh(tmp_path / "k.obj")
        assert len(side["curvature"]) == len(surf.points)

        assert run_cli("analyze", out) == 0
        first = (out / "report.json").read_bytes()
        assert run_cli("analyze", out) == 0
        assert (out / "report.json").read_bytes() == first
        report = json.loads(first)
        scan = report["scans"][0]["scan"]
        assert scan["passed"] and not scan["insufficient_levels"]
        assert "PASS" in capsys.readouterr().out
        assert (out / "report.timings.json").exists()

    def test_synthetic_growth(self, tmp_path):
        out = tmp_path / "quad"
        assert run_cli("solve", shipped_problem_path("hyperbolic_quad"), "--out", out,
                       "--schedule", "1,2,3") == 0
        spec = dict(problem_dict("hyperbolic_quad")["analysis"], synthetic_curvature="level_squared")
        (tmp_path / "spec.json").write_text(json.dumps(spec))
        assert run_cli("analyze", out, "--spec", tmp_path / "spec.json",
                       "--out", tmp_path / "syn.json") == 0
        growth = json.loads((tmp_path / "syn.json").read_text())["scans"][0]["growth"]
        slope = np.array(growth["rho_tilde"]) / np.array(growth["levels"])
        np.testing.assert_allclose(slope, slope[0], rtol=1e-12)

    def test_geometric_failures(self, tmp_path):
        out = tmp_path / "psl"
        assert run_cli("solve", shipped_problem_path("psl2_origin"), "--out", out, "--h", 0.05) == 0
        assert run_cli("reflect", out / "final.obj", "--axis", "vertical",
                       "--out", tmp_path / "ok") == 0
        assert run_cli("reflect", out / "final.obj", "--axis", "vertical:0.8,0",
                       "--out", tmp_path / "bad") == 4
        quad = tmp_path / "quad"
        assert run_cli("solve", shipped_problem_path("hyperbolic_quad"), "--out", quad,
                       "--h", 0.1, "--schedule", "1") == 0
        assert run_cli("reflect", quad / "final.obj", "--axis", "vertical:0.3,0.3",
                       "--out", tmp_path / "none") == 4

    def test_module_entry(self):
        proc = subprocess.run([sys.executable, "-m", "jslab", "check",
                               str(shipped_problem_path("all_a_square"))],
                              capture_output=True, text=True)
        assert proc.returncode == 1
        assert "not solvable" in proc.stdout
