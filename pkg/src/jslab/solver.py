"""Discrete area-minimizing vertical graphs and the truncation sequence.

The discrete area of a piecewise-affine graph is

    sum_T |T| nu_T sqrt(nu_T^2 + |grad u_T + s_T|^2)

with |T| the coordinate area, nu_T the conformal factor at the centroid and
s_T a per-triangle copy of the connection field tau nu (y, -x).  For tau = 0
the field vanishes.  For tau > 0 it is chosen so that the flux of every
constant function is the rotated gradient of a piecewise-affine stream
function; discrete first variations of constants then vanish exactly, as
horizontal slices are minimal in the continuum.

Minimization is damped Newton on the interior heights with an Armijo line
search, run until both the gradient residual and the last height update are
below the tolerance.  When the Newton step is cut back hard (steep graphs near jump
corners) the lagged-diffusion direction, a positive definite weighted
Laplacian solve, is tried as well and the lower energy wins.
"""

from dataclasses import dataclass, field, replace
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .boundary import check_jenkins_serrin, regularize_data
from .config import DEFAULTS
from .errors import DegenerateTriangleError, NoConvergenceError, NotSolvableError
from .geometry import base_distance, conformal_factor
from .mesh import distance_to_polyline, triangle_areas


@dataclass(frozen=True)
class SolveOptions:
    tol_residual: float = DEFAULTS.tol_residual
    max_iters: int = DEFAULTS.max_iters
    armijo_c: float = DEFAULTS.armijo_c
    backtrack: float = DEFAULTS.backtrack
    min_step: float = DEFAULTS.min_step
    init: object = "harmonic"        # "harmonic", "zero" or an array of heights

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (0 < self.backtrack < 1 and 0 < self.armijo_c < 1):
            raise ValueError("line-search parameters must lie in (0, 1)")


@dataclass(frozen=True)
class SolveStats:
    converged: bool
    iterations: int
    residual: float
    area: float
    energies: tuple
    gradient_steps: int


def stream_function(params, p):
    """psi with rotated gradient (psi_y, -psi_x) = tau nu (y, -x) / sqrt(1 + tau^2 r^2)."""
    p = np.asarray(p, float)
    tau = params.tau
    if tau == 0:
        return np.zeros(p.shape[:-1])
    w = np.sqrt(1.0 + tau * tau * (p[..., 0] ** 2 + p[..., 1] ** 2))
    if params.kappa == 0:
        return w / tau
    k = -params.kappa / (4 * tau * tau)
    return np.arctanh(w * np.sqrt(k / (1 + k))) / (tau * np.sqrt(k * (1 + k)))


class AreaFunctional:
    """Discrete graph area on a fixed base triangulation."""

    def __init__(self, params, mesh):
        self.params = params
        self.mesh = mesh
        v, t = mesh.vertices, mesh.triangles
        area = triangle_areas(v, t)
        if np.any(area <= 0):
            raise DegenerateTriangleError(f"{int(np.sum(area <= 0))} degenerate or inverted triangles")
        self.area = area
        p = v[t]
        # gradients of the three hat functions on each triangle, shape (T, 3, 2)
        e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
        self.grad_hat = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2 * area[:, None, None])
        self.nu = conformal_factor(params, p.mean(axis=1))
        self.shift = self._shift_field(v)
        self.lumped = np.bincount(t.ravel(), weights=np.repeat(area / 3, 3), minlength=len(v))
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        self._rows, self._cols = rows, cols

    def _shift_field(self, v):
        if self.params.tau == 0:
            return np.zeros((len(self.area), 2))
        psi = stream_function(self.params, v)
        g = np.einsum("tk,tkj->tj", psi[self.mesh.triangles], self.grad_hat)
        m = np.stack([g[:, 1], -g[:, 0]], axis=1)
        nu = self.nu
        m2 = np.einsum("ij,ij->i", m, m)
        if np.any(m2 >= nu * nu):
            raise DegenerateTriangleError("mesh too coarse for the connection field")
        return nu[:, None] * m / np.sqrt(nu * nu - m2)[:, None]

    def gradients(self, u):
        return np.einsum("tk,tkj->tj", u[self.mesh.triangles], self.grad_hat)

    def density(self, u):
        q = self.gradients(u) + self.shift
        return self.nu * np.sqrt(self.nu ** 2 + np.einsum("ij,ij->i", q, q))

    def energy(self, u):
        return float(np.sum(self.area * self.density(u)))

    def _flux(self, u):
        q = self.gradients(u) + self.shift
        s = np.sqrt(self.nu ** 2 + np.einsum("ij,ij->i", q, q))
        return q, s

    def gradient(self, u):
        q, s = self._flux(u)
        flux = (self.area * self.nu / s)[:, None] * q
        local = np.einsum("tj,tkj->tk", flux, self.grad_hat)
        return np.bincount(self.mesh.triangles.ravel(), weights=local.ravel(),
                           minlength=self.mesh.n_vertices)

    def hessian(self, u):
        q, s = self._flux(u)
        qq = q[:, :, None] * q[:, None, :]
        mat = (self.nu / s)[:, None, None] * (np.eye(2)[None] - qq / (s * s)[:, None, None])
        local = np.einsum("tai,tij,tbj->tab", self.grad_hat, mat, self.grad_hat) * self.area[:, None, None]
        n = self.mesh.n_vertices
        return sp.csr_matrix((local.ravel(), (self._rows, self._cols)), shape=(n, n))

    def lagged(self, u):
        """Weighted Laplacian with the coefficients frozen at ``u`` (positive definite)."""
        _, s = self._flux(u)
        local = np.einsum("tai,tbi->tab", self.grad_hat, self.grad_hat) \
            * (self.area * self.nu / s)[:, None, None]
        n = self.mesh.n_vertices
        return sp.csr_matrix((local.ravel(), (self._rows, self._cols)), shape=(n, n))

    def laplacian(self):
        local = np.einsum("tai,tbi->tab", self.grad_hat, self.grad_hat) * self.area[:, None, None]
        n = self.mesh.n_vertices
        return sp.csr_matrix((local.ravel(), (self._rows, self._cols)), shape=(n, n))

    def residual(self, g):
        interior = ~self.mesh.boundary
        if not np.any(interior):
            return 0.0
        return float(np.max(np.abs(g[interior])))


def discrete_area(params, mesh):
    """Discrete graph area of ``mesh.heights``."""
    return AreaFunctional(params, mesh).energy(mesh.heights)


def _full_heights(mesh, boundary_heights):
    b = np.asarray(boundary_heights, float)
    u = np.zeros(mesh.n_vertices)
    if b.shape == (mesh.n_vertices,):
        u[mesh.boundary] = b[mesh.boundary]
    elif b.shape == (len(mesh.loop),):
        u[mesh.loop] = b
    else:
        raise ValueError("boundary heights must be given per boundary vertex or per vertex")
    if not np.all(np.isfinite(u)):
        raise ValueError("boundary heights must be finite")
    return u


def harmonic_extension(functional, u):
    interior = ~functional.mesh.boundary
    if not np.any(interior):
        return u
    lap = functional.laplacian().tocsc()
    rhs = -lap[interior][:, ~interior] @ u[~interior]
    out = u.copy()
    out[interior] = splu(lap[interior][:, interior].tocsc()).solve(rhs)
    return out


def _newton_direction(F, u, gi, interior):
    H = F.hessian(u)[interior][:, interior].tocsc()
    try:
        d = -splu(H).solve(gi)
    except RuntimeError:
        d = None
    if d is None or not np.all(np.isfinite(d)) or not float(gi @ d) < 0:
        d = -gi / F.lumped[interior]
    return d


def _line_search(F, u, interior, d, gi, e0, opts):
    slope = float(gi @ d)
    slack = DEFAULTS.energy_slack * abs(e0)
    step = 1.0
    while True:
        trial = u.copy()
        trial[interior] += step * d
        e1 = F.energy(trial)
        if e1 <= e0 + opts.armijo_c * step * slope + slack:
            return step, trial, e1
        step *= opts.backtrack
        if step < opts.min_step:
            return 0.0, u, e0


def solve_plateau_graph(params, mesh, boundary_heights, opts=None):
    """Minimize the discrete area with the given Dirichlet data.

    Returns a copy of ``mesh`` with solved heights; the run summary is in
    ``mesh_out.stats``.  Raises :class:`NoConvergenceError` carrying the best
    iterate when the residual tolerance is not met.
    """
    opts = opts or SolveOptions()
    F = AreaFunctional(params, mesh)
    u = _full_heights(mesh, boundary_heights)
    interior = ~mesh.boundary
    if isinstance(opts.init, str):
        if opts.init == "harmonic":
            u = harmonic_extension(F, u)
        elif opts.init != "zero":
            raise ValueError(f"unknown init {opts.init!r}")
    else:
        start = np.asarray(opts.init, float)
        u[interior] = start[interior]

    energies = [F.energy(u)]
    grad_steps = 0
    g = F.gradient(u)
    res = F.residual(g)
    it = 0
    # heights on tiny graded triangles barely move the gradient, so iterate
    # until the last update is below the tolerance as well
    update = 0.0 if res <= opts.tol_residual else np.inf
    while (res > opts.tol_residual or update > opts.tol_residual) and it < opts.max_iters:
        it += 1
        gi = g[interior]
        e0 = energies[-1]
        step, trial, e1 = _line_search(F, u, interior, _newton_direction(F, u, gi, interior), gi, e0, opts)
        if step < 0.25:
            # Newton overshoots where the graph is steep; the lagged-diffusion
            # step stays bounded there
            d = -splu(F.lagged(u)[interior][:, interior].tocsc()).solve(gi)
            alt = _line_search(F, u, interior, d, gi, e0, opts)
            if alt[0] >= opts.min_step and (step < opts.min_step or alt[2] < e1):
                step, trial, e1 = alt
                grad_steps += 1
        if step < opts.min_step:
            break
        g_new = F.gradient(trial)
        res_new = F.residual(g_new)
        if e1 > e0 and res_new >= res:
            # round-off floor: no progress possible
            break
        update = float(np.max(np.abs(trial - u)))
        u, g, res = trial, g_new, res_new
        energies.append(min(e1, e0))

    stats = SolveStats(converged=res <= opts.tol_residual, iterations=it, residual=res,
                       area=F.energy(u), energies=tuple(energies), gradient_steps=grad_steps)
    out = replace(mesh.with_heights(u), stats=stats)
    if not stats.converged:
        raise NoConvergenceError(f"residual {res:.3e} above tolerance after {it} iterations",
                                 result=out)
    return out


# --- truncation sequence -----------------------------------------------------------

def _level_arcs(spec, n):
    return [regularize_data(a, n) if a.kind == "C" else a for a in spec.arcs]


def _arc_value(arc, n, s):
    if arc.kind == "A":
        return np.full(np.shape(s), float(n))
    if arc.kind == "B":
        return np.full(np.shape(s), -float(n))
    return arc.values(s)


def junction_jumps(spec, mesh, n):
    """Vertical segments of Gamma_n as (vertex, incoming height, outgoing height)."""
    arcs = _level_arcs(spec, n)
    out = []
    for v in np.flatnonzero(mesh.junction):
        i = mesh.arc_index[v]
        before = float(_arc_value(arcs[i - 1], n, np.array([arcs[i - 1].length]))[0])
        after = float(_arc_value(arcs[i], n, np.array([0.0]))[0])
        if before != after:
            out.append((int(v), before, after))
    return tuple(out)


def boundary_values(spec, mesh, n):
    """Heights of Gamma_n at the boundary vertices of ``mesh`` (loop order).

    A arcs give n, B arcs -n and C arcs their regularized data; a junction
    vertex takes the mean of the two prescriptions meeting there.
    """
    arcs = _level_arcs(spec, n)
    loop = mesh.loop
    idx = mesh.arc_index[loop]
    par = mesh.arc_param[loop]
    out = np.empty(len(loop))
    for i, arc in enumerate(arcs):
        sel = idx == i
        out[sel] = _arc_value(arc, n, par[sel])
        j = sel & mesh.junction[loop]
        if np.any(j):
            prev = arcs[i - 1]
            out[j] = 0.5 * (out[j] + _arc_value(prev, n, np.array([prev.length]))[0])
    return out


def solve_truncated_level(spec, mesh, n, opts=None):
    """Discrete minimal graph bounded by Gamma_n."""
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    sol = solve_plateau_graph(spec.params, mesh, boundary_values(spec, mesh, n), opts)
    return replace(sol, jumps=junction_jumps(spec, mesh, n))


@dataclass(frozen=True)
class Probe:
    center: np.ndarray
    radius: float
    vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, int))


def make_probe(spec, mesh, center, radius):
    """Interior vertices within M(kappa) distance ``radius`` of ``center``."""
    center = np.asarray(center, float)
    d = base_distance(spec.params, np.broadcast_to(center, mesh.vertices.shape), mesh.vertices)
    sel = np.flatnonzero((d <= radius) & ~mesh.boundary)
    poly = mesh.vertices[mesh.loop]
    if len(sel) and distance_to_polyline(poly, mesh.vertices[sel]).min() < 2 * mesh.h:
        raise ValueError("probe region comes within 2h of the boundary")
    return Probe(center=center, radius=float(radius), vertices=sel)


def default_probe(spec, mesh):
    """Disc around the deepest vertex, kept 10% of the diameter off the boundary."""
    poly = mesh.vertices[mesh.loop]
    inner = mesh.interior
    depth = distance_to_polyline(poly, mesh.vertices[inner])
    k = inner[np.argmax(depth)]
    margin = max(0.1 * spec.diameter(), 2 * mesh.h)
    radius = max(depth.max() - margin, 0.0)
    return make_probe(spec, mesh, mesh.vertices[k], radius)


@dataclass(frozen=True)
class TruncationRun:
    schedule: tuple
    solutions: tuple
    probes: tuple
    convergence_log: tuple           # per level after the first: sup difference per probe
    converged: bool
    tol: float
    verdict: object = None


def _collapse(spec, mesh, schedule):
    kept, last = [], None
    for n in schedule:
        b = boundary_values(spec, mesh, n)
        if last is None or not np.array_equal(b, last):
            kept.append(n)
            last = b
    return kept


def run_jenkins_serrin(spec, mesh, schedule=(1, 2, 3, 4, 5), opts=None, probes=None, tol=1e-2,
                       force=False, strict=False):
    """Solve Gamma_n for each n of ``schedule`` with warm starts.

    Levels whose boundary data coincide with the previous level are skipped,
    so a domain with bounded C data collapses to a single solve.  With
    ``strict`` a run whose last probe difference is not below ``tol`` raises
    :class:`NoConvergenceError`.
    """
    schedule = [int(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise ValueError("schedule must be a strictly increasing list of integers >= 1")
    verdict = check_jenkins_serrin(spec)
    if not verdict.solvable and not force:
        raise NotSolvableError("the Jenkins-Serrin conditions fail; pass force=True to run anyway",
                               verdict)
    opts = opts or SolveOptions()
    probes = tuple(probes) if probes is not None else (default_probe(spec, mesh),)
    schedule = _collapse(spec, mesh, schedule)
    solutions, log = [], []
    init = opts.init
    for n in schedule:
        try:
            sol = solve_truncated_level(spec, mesh, n, replace(opts, init=init))
        except NoConvergenceError as exc:
            partial = TruncationRun(tuple(schedule[:len(solutions)]), tuple(solutions), probes,
                                    tuple(log), False, tol, verdict)
            raise NoConvergenceError(f"level {n}: {exc}", result=partial) from exc
        if solutions:
            prev = solutions[-1].heights
            log.append(tuple(float(np.max(np.abs(sol.heights[p.vertices] - prev[p.vertices])))
                             if len(p.vertices) else 0.0 for p in probes))
        solutions.append(sol)
        init = sol.heights
    converged = len(solutions) == 1 or all(d < tol for d in log[-1])
    run = TruncationRun(tuple(schedule), tuple(solutions), probes, tuple(log), converged, tol,
                        verdict)
    if strict and not converged:
        raise NoConvergenceError("probe differences did not fall below tolerance", result=run)
    return run


def uniqueness_probe(spec, mesh, n, opts=None):
    """Sup-norm gap between solutions of level ``n`` from zero and harmonic starts."""
    opts = opts or SolveOptions()
    a = solve_truncated_level(spec, mesh, n, replace(opts, init="zero"))
    b = solve_truncated_level(spec, mesh, n, replace(opts, init="harmonic"))
    return float(np.max(np.abs(a.heights - b.heights)))
