"""
Scherk's surface from infinite boundary data
============================================

Heights +n on two opposite sides of a square and -n on the other two give a
sequence of minimal graphs.  As n grows they settle on Scherk's surface
u = log(cos y / cos x).  Reflecting the limit about the vertical line over a
corner continues it into the diagonal neighbour square.
"""

import numpy as np

from jslab.boundary import DomainSpec, check_jenkins_serrin
from jslab.geometry import ModelParams
from jslab.mesh import build_mesh
from jslab.reflection import ReflectionAxis, extend_by_reflection, seam_smoothness_report
from jslab.solver import make_probe, run_jenkins_serrin

a = np.pi / 2
params = ModelParams()          # kappa = tau = 0: ordinary R^3
square = [(-a, -a), (a, -a), (a, a), (-a, a)]
spec = DomainSpec.polygon(params, square, "BABA")

# The polygon inequalities hold, and the square is balanced.
verdict = check_jenkins_serrin(spec)
print("solvable:", verdict.solvable, " balance (alpha, beta):", verdict.balance)

# A coarse mesh keeps the demo quick.  The corner (a, a) gets a graded patch
# so the vertical segment over it is resolved.
mesh = build_mesh(spec, 0.04, graded_corners=(2,))
print("mesh:", mesh.n_vertices, "vertices,", len(mesh.triangles), "triangles")

probe = make_probe(spec, mesh, (0.0, 0.0), 0.5)
run = run_jenkins_serrin(spec, mesh, (1, 2, 3, 4, 5), probes=[probe])
for (lo, hi), d in zip(zip(run.schedule, run.schedule[1:]), run.convergence_log):
    print(f"levels {lo} -> {hi}: sup change on the probe disc {d[0]:.4f}")

# Compare the last level with the closed form on the probe disc.
exact = np.log(np.cos(mesh.vertices[:, 1]) / np.cos(mesh.vertices[:, 0]))
last = run.solutions[-1]
err = np.abs(last.heights - exact)[probe.vertices].max()
print(f"level {run.schedule[-1]} vs closed form on the probe: {err:.2e}")

# Reflect about the fiber over the corner.
ext = extend_by_reflection(params, last, ReflectionAxis.vertical((a, a)))
rep = seam_smoothness_report(params, ext)
print("extended surface:", len(ext.surface.points), "vertices, manifold:", ext.surface.is_manifold())
print(f"seam: gap {rep.c0_gap}, normal kink {rep.normal_kink_max:.2e} rad, "
      f"curvature jump {rep.curvature_jump_max:.3f}")

# The reflected half matches the closed form again, now over [a, 3a]^2.
pts = ext.half2.points[np.unique(ext.half2.triangles)]
x, y = np.pi - pts[:, 0], np.pi - pts[:, 1]
near = np.hypot(x, y) <= 0.5
print(f"reflected half vs u(pi - x, pi - y): {np.abs(pts[near, 2] - np.log(np.cos(y[near]) / np.cos(x[near]))).max():.2e}")
