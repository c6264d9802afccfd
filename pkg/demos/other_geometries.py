"""
Beyond Euclidean space
======================

The same pipeline runs in H^2 x R (kappa = -1, tau = 0).  With tau > 0 it
runs in the universal cover of PSL2(R) too.  The problem files shipped with
the package set these cases up, and the checker explains why some domains
admit no solution.
"""

import numpy as np

from jslab.boundary import check_jenkins_serrin
from jslab.mesh import build_mesh
from jslab.problems import shipped_problem
from jslab.reflection import ReflectionAxis, extend_by_reflection, seam_smoothness_report
from jslab.solver import run_jenkins_serrin

# A geodesic quadrilateral in the hyperbolic disc, labeled A B A B.
quad = shipped_problem("hyperbolic_quad")
mesh = build_mesh(quad.spec, 0.08)
run = run_jenkins_serrin(quad.spec, mesh, (1, 2, 3, 4))
print("hyperbolic quad probe changes:", [round(d[0], 5) for d in run.convergence_log])

# Finite data in PSL2: a single solve, reflected about the fiber over the origin.
psl = shipped_problem("psl2_origin")
mesh = build_mesh(psl.spec, 0.04, graded_corners=psl.solver.graded_corners)
run = run_jenkins_serrin(psl.spec, mesh, (1, 2, 3))
print("PSL2 levels actually solved:", run.schedule)
ext = extend_by_reflection(psl.params, run.solutions[-1], ReflectionAxis.vertical())
print(f"PSL2 seam kink: {seam_smoothness_report(psl.params, ext).normal_kink_max:.2e} rad")

# Two domains with no solution, and the polygon that proves it.
for name in ("long_rectangle", "all_a_square"):
    v = check_jenkins_serrin(shipped_problem(name).spec)
    w = v.witnesses[0]
    print(f"{name}: solvable={v.solvable}; polygon {list(w.polygon)} "
          f"alpha={w.alpha:g} beta={w.beta:g} gamma={w.gamma:g} fails {w.violated}")
