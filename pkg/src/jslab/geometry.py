"""Model geometry of the homogeneous spaces E(kappa, tau), kappa <= 0, tau >= 0.

The model is the disc D(2/sqrt(-kappa)) x R (all of R^3 when kappa = 0) with
the metric

    nu^2 (dx^2 + dy^2) + (tau nu (y dx - x dy) + dt)^2,
    nu = 1 / (1 + kappa (x^2 + y^2) / 4).

The base M(kappa) is the same disc with metric nu^2 (dx^2 + dy^2).  For
kappa < 0 it is a Poincare disc of radius R = 2/sqrt(-kappa) and all of its
isometries are Moebius maps of the rescaled unit disc z = (x + iy)/R.

Every function accepts arrays of points with trailing dimension 2 (or 3 for
ambient points) and broadcasts over the leading dimensions.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS
from .errors import CoincidentPointsError, OutsideDiscError


@dataclass(frozen=True)
class ModelParams:
    """The pair (kappa, tau) selecting E(kappa, tau)."""

    kappa: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and np.isfinite(self.tau)):
            raise ValueError("kappa and tau must be finite")
        if self.kappa > 0:
            raise ValueError(f"kappa must be <= 0, got {self.kappa}")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")

    @property
    def disk_radius(self):
        return 2.0 / np.sqrt(-self.kappa) if self.kappa < 0 else np.inf

    @property
    def is_euclidean(self):
        return self.kappa == 0 and self.tau == 0

    @property
    def is_product(self):
        return self.tau == 0


def _xy(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] not in (2, 3):
        raise ValueError(f"points need 2 or 3 coordinates, got shape {p.shape}")
    return p[..., 0], p[..., 1]


def check_inside(params, p, margin=None):
    """Raise OutsideDiscError unless every point is strictly inside the disc."""
    if params.kappa == 0:
        return
    margin = DEFAULTS.disc_margin if margin is None else margin
    x, y = _xy(p)
    r2 = x * x + y * y
    limit = (1.0 - margin) * 4.0 / (-params.kappa)
    if np.any(~(r2 <= limit)):
        worst = float(np.sqrt(np.max(r2)))
        raise OutsideDiscError(
            f"point at radius {worst:.17g} outside the model disc of radius "
            f"{params.disk_radius:.17g} (kappa={params.kappa})"
        )


def conformal_factor(params, p):
    """nu_kappa at base point(s) ``p``."""
    check_inside(params, p)
    x, y = _xy(p)
    return 1.0 / (1.0 + params.kappa * (x * x + y * y) / 4.0)


def metric_at(params, p):
    """Components of the E(kappa, tau) metric in (x, y, t) order, shape (..., 3, 3)."""
    nu = conformal_factor(params, p)
    x, y = _xy(p)
    tau = params.tau
    g = np.empty(np.shape(nu) + (3, 3))
    nu2 = nu * nu
    g[..., 0, 0] = nu2 * (1.0 + tau * tau * y * y)
    g[..., 1, 1] = nu2 * (1.0 + tau * tau * x * x)
    g[..., 0, 1] = g[..., 1, 0] = -tau * tau * nu2 * x * y
    g[..., 0, 2] = g[..., 2, 0] = tau * nu * y
    g[..., 1, 2] = g[..., 2, 1] = -tau * nu * x
    g[..., 2, 2] = 1.0
    return g


def coframe_at(params, p):
    """Orthonormal coframe A with metric = A^T A.

    Rows are the one-forms nu dx, nu dy and tau nu (y dx - x dy) + dt.
    """
    nu = conformal_factor(params, p)
    x, y = _xy(p)
    a = np.zeros(np.shape(nu) + (3, 3))
    a[..., 0, 0] = nu
    a[..., 1, 1] = nu
    a[..., 2, 0] = params.tau * nu * y
    a[..., 2, 1] = -params.tau * nu * x
    a[..., 2, 2] = 1.0
    return a


def inner(params, p, v, w):
    """Metric inner product <v, w> at ambient/base point ``p``."""
    g = metric_at(params, p)
    return np.einsum("...i,...ij,...j->...", np.asarray(v, float), g, np.asarray(w, float))


# --- base space M(kappa) -------------------------------------------------------

def _to_complex(params, p):
    x, y = _xy(p)
    return (x + 1j * y) / params.disk_radius


def _from_complex(params, z):
    z = np.asarray(z) * params.disk_radius
    return np.stack([z.real, z.imag], axis=-1)


def _mobius(a, z):
    """Disc automorphism sending a to 0."""
    return (z - a) / (1.0 - np.conj(a) * z)


def _mobius_inv(a, w):
    return (w + a) / (1.0 + np.conj(a) * w)


def base_distance(params, p, q):
    """Geodesic distance in M(kappa)."""
    check_inside(params, p)
    check_inside(params, q)
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if params.kappa == 0:
        return np.linalg.norm(q[..., :2] - p[..., :2], axis=-1)
    zp = _to_complex(params, p)
    zq = _to_complex(params, q)
    w = np.abs(_mobius(zp, zq))
    # unit-disc distance is 2 artanh|w|; the metric is (R/2)^2 times the unit one
    return params.disk_radius * np.arctanh(np.minimum(w, 1.0))


def move_to_origin(params, a, p):
    """Apply the base isometry sending ``a`` to the origin (translation or Moebius).

    Only the first two coordinates of ``p`` are transformed; a third (fiber)
    coordinate is passed through.
    """
    p = np.asarray(p, float)
    a = np.asarray(a, float)
    if params.kappa == 0:
        out = p.copy()
        out[..., :2] = p[..., :2] - a[:2]
        return out
    w = _mobius(_to_complex(params, a), _to_complex(params, p))
    out = p.copy()
    out[..., :2] = _from_complex(params, w)
    return out


def move_from_origin(params, a, p):
    """Inverse of :func:`move_to_origin`."""
    p = np.asarray(p, float)
    a = np.asarray(a, float)
    if params.kappa == 0:
        out = p.copy()
        out[..., :2] = p[..., :2] + a[:2]
        return out
    z = _mobius_inv(_to_complex(params, a), _to_complex(params, p))
    out = p.copy()
    out[..., :2] = _from_complex(params, z)
    return out


def point_reflection(params, center, p):
    """Rotation by pi of M(kappa) about ``center`` (third coordinate untouched)."""
    q = move_to_origin(params, center, p)
    q[..., :2] = -q[..., :2]
    return move_from_origin(params, center, q)


def geodesic_reflection(params, a, b, p):
    """Reflection of M(kappa) across the complete geodesic through ``a`` and ``b``."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    q = move_to_origin(params, a, p)
    d = move_to_origin(params, a, b)[:2]
    norm = np.hypot(d[0], d[1])
    if norm == 0:
        raise CoincidentPointsError("geodesic needs two distinct points")
    c, s = d / norm
    x, y = q[..., 0].copy(), q[..., 1].copy()
    # mirror across the line through 0 with direction (c, s)
    q[..., 0] = (c * c - s * s) * x + 2 * c * s * y
    q[..., 1] = 2 * c * s * x - (c * c - s * s) * y
    return move_from_origin(params, a, q)


@dataclass(frozen=True)
class GeodesicSegment:
    start: np.ndarray
    end: np.ndarray
    points: np.ndarray   # (samples, 2) polyline, endpoint-exact
    length: float        # exact M(kappa) length


def geodesic_points(params, p, q, s):
    """Points at fractions ``s`` (array in [0, 1]) of the geodesic from p to q."""
    s = np.asarray(s, float)
    p = np.asarray(p, float)[:2]
    q = np.asarray(q, float)[:2]
    if params.kappa == 0:
        return p + s[..., None] * (q - p)
    zp = _to_complex(params, p)
    w = _mobius(zp, _to_complex(params, q))
    rho = np.arctanh(abs(w))
    ws = np.tanh(s * rho) * (w / abs(w))
    return _from_complex(params, _mobius_inv(zp, ws))


def geodesic_between(params, p, q, samples=65):
    """Sampled M(kappa) geodesic from p to q with equal arclength spacing."""
    check_inside(params, p)
    check_inside(params, q)
    p = np.asarray(p, float)[:2]
    q = np.asarray(q, float)[:2]
    length = float(base_distance(params, p, q))
    if length == 0.0:
        raise CoincidentPointsError(f"geodesic endpoints coincide at {p.tolist()}")
    if samples < 2:
        raise ValueError("a geodesic polyline needs at least 2 samples")
    pts = geodesic_points(params, p, q, np.linspace(0.0, 1.0, samples))
    pts[0], pts[-1] = p, q
    return GeodesicSegment(start=p, end=q, points=pts, length=length)


def polyline_length(params, points):
    """M(kappa) length of a polyline, each piece measured by its geodesic chord."""
    pts = np.asarray(points, float)
    return float(np.sum(base_distance(params, pts[:-1], pts[1:])))


# --- graphs --------------------------------------------------------------------

def graph_area_element(params, p, grad_u):
    """Area density of the graph t = u(x, y) with respect to dx dy.

    With a = u_x + tau nu y and b = u_y - tau nu x the induced metric on the
    graph has E = nu^2 + a^2, F = a b, G = nu^2 + b^2, so
    sqrt(EG - F^2) = nu sqrt(nu^2 + a^2 + b^2).
    """
    nu = conformal_factor(params, p)
    x, y = _xy(p)
    grad_u = np.asarray(grad_u, float)
    a = grad_u[..., 0] + params.tau * nu * y
    b = grad_u[..., 1] - params.tau * nu * x
    return nu * np.sqrt(nu * nu + a * a + b * b)


# --- blow-up ---------------------------------------------------------------------

def rescaled_params(lam, params):
    """Parameters of the metric pushed forward by the homothety of ratio ``lam``.

    lambda^2 ds^2 on E(kappa, tau) is E(kappa/lambda^2, tau/lambda) in the
    scaled coordinates.
    """
    if not lam > 0:
        raise ValueError("homothety ratio must be positive")
    return ModelParams(params.kappa / lam**2, params.tau / lam)


def rescaled_metric_at(lam, params, p):
    """Metric ds_lambda^2 on D(2 lambda) x R at the scaled point ``p``.

    For kappa = -1 its conformal factor is 1/(1 - (u^2+v^2)/(4 lambda^2)) and
    its connection term carries tau/lambda.
    """
    return metric_at(rescaled_params(lam, params), p)


def homothety(lam, p):
    if not lam > 0:
        raise ValueError("homothety ratio must be positive")
    return lam * np.asarray(p, float)


def pullback_check(lam, params, p, v, w):
    """Both sides of H^*(ds_lambda^2)(v, w) = lambda^2 ds^2(v, w) at p.

    The differential of the homothety is lambda * identity.
    """
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    w = np.asarray(w, float)
    lhs = np.einsum("...i,...ij,...j->...", lam * v,
                    rescaled_metric_at(lam, params, homothety(lam, p)), lam * w)
    rhs = lam**2 * inner(params, p, v, w)
    return lhs, rhs
