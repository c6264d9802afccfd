"""Numerical constants shared by every module.

All tolerances live in one frozen record so that reports are reproducible:
a run is fully described by its inputs plus ``DEFAULTS``.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # geometry
    disc_margin: float = 1e-9          # reject x^2+y^2 > (1 - margin) * 4/(-kappa)
    det_rtol: float = 1e-12
    pullback_rtol: float = 1e-10
    geodesic_length_rtol: float = 1e-8
    # boundary
    endpoint_atol: float = 1e-9        # arcs must share endpoints to this
    convexity_atol: float = 1e-9       # angular slack of the supporting-geodesic test
    marginal_atol: float = 1e-9        # |gamma - 2 alpha| below this is flagged marginal
    balance_rtol: float = 1e-9
    enumeration_cap: int = 100_000
    # solver
    tol_residual: float = 1e-10
    max_iters: int = 200
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    energy_slack: float = 1e-13        # relative round-off allowance in the energy test
    max_principle_atol: float = 1e-9
    min_angle_deg: float = 20.0
    # reflection
    fixed_point_atol: float = 1e-14
    fd_step: float = 1e-6
    isometry_rtol: float = 1e-8
    # analysis
    scan_growth: float = 1.1
    scan_min_levels: int = 4
    brioschi_step: float = 1e-3        # relative to the stencil radius


DEFAULTS = Tolerances()
