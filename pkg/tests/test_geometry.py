import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from jslab.errors import CoincidentPointsError, OutsideDiscError
from jslab.geometry import (
    ModelParams,
    base_distance,
    coframe_at,
    conformal_factor,
    geodesic_between,
    geodesic_reflection,
    graph_area_element,
    homothety,
    metric_at,
    move_from_origin,
    move_to_origin,
    point_reflection,
    pullback_check,
    rescaled_metric_at,
)

H2 = ModelParams(-1.0, 0.0)
PSL = ModelParams(-1.0, 1.0)
ALL = [ModelParams(k, t) for k in (0.0, -1.0) for t in (0.0, 1.0)]


def disc_points(rng, n, radius=1.6):
    r = radius * np.sqrt(rng.random(n))
    th = 2 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


class TestParams:
    def test_defaults_are_euclidean(self):
        p = ModelParams()
        assert p.is_euclidean and p.disk_radius == np.inf

    def test_disk_radius(self):
        assert ModelParams(-4.0).disk_radius == 1.0

    @pytest.mark.parametrize("k,t", [(0.5, 0.0), (0.0, -1.0), (np.nan, 0.0)])
    def test_rejects_bad_values(self, k, t):
        with pytest.raises(ValueError):
            ModelParams(k, t)


class TestConformalFactor:
    def test_examples(self):
        assert conformal_factor(ModelParams(), (3.7, -2.0)) == 1.0
        assert conformal_factor(H2, (0.0, 0.0)) == 1.0
        assert conformal_factor(H2, (1.0, 0.0)) == pytest.approx(4 / 3, rel=1e-15)

    def test_outside_disc(self):
        with pytest.raises(OutsideDiscError):
            conformal_factor(H2, (2.0, 0.0))
        with pytest.raises(OutsideDiscError):
            conformal_factor(H2, (0.0, 1.99999999999))

    def test_monotone_in_radius(self):
        r = np.linspace(0, 1.99, 200)
        nu = conformal_factor(H2, np.column_stack([r, 0 * r]))
        assert np.all(np.diff(nu) > 0) and nu[0] == 1.0


class TestMetric:
    def test_symbolic_expansion(self):
        x, y, k, t = sympy.symbols("x y kappa tau", real=True)
        dx, dy, dt = sympy.symbols("dx dy dt")
        nu = 1 / (1 + k * (x**2 + y**2) / 4)
        form = sympy.expand(nu**2 * (dx**2 + dy**2) + (t * nu * (y * dx - x * dy) + dt) ** 2)
        d = (dx, dy, dt)
        G = sympy.Matrix(3, 3, lambda i, j: sympy.diff(form, d[i], d[j]) / 2)
        f = sympy.lambdify((x, y, k, t), G, "numpy")
        rng = np.random.default_rng(3)
        for params in ALL:
            for p in disc_points(rng, 20):
                want = np.array(f(p[0], p[1], params.kappa, params.tau), float)
                np.testing.assert_allclose(metric_at(params, p), want, rtol=1e-14, atol=1e-15)

    def test_worked_example(self):
        g = metric_at(PSL, (1.0, 0.0))
        want = np.array([[16 / 9, 0, 0], [0, 32 / 9, -4 / 3], [0, -4 / 3, 1]])
        np.testing.assert_allclose(g, want, rtol=1e-15)
        assert np.linalg.det(g) == pytest.approx(256 / 81, rel=1e-14)

    @pytest.mark.parametrize("params", [ModelParams(), H2])
    def test_identity_at_origin(self, params):
        np.testing.assert_array_equal(metric_at(params, (0.0, 0.0)), np.eye(3))

    def test_coframe_factorizes_metric(self):
        rng = np.random.default_rng(0)
        for params in ALL:
            p = disc_points(rng, 100)
            A = coframe_at(params, p)
            np.testing.assert_allclose(np.einsum("nki,nkj->nij", A, A), metric_at(params, p),
                                       rtol=1e-14, atol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1.9, 1.9), st.floats(-1.9, 1.9), st.sampled_from(ALL))
    def test_spd_with_det_nu4(self, x, y, params):
        if x * x + y * y > 3.9:
            return
        g = metric_at(params, (x, y))
        nu = conformal_factor(params, (x, y))
        np.testing.assert_array_equal(g, g.T)
        assert np.all(np.linalg.eigvalsh(g) > 0)
        assert np.linalg.det(g) == pytest.approx(nu**4, rel=1e-12)


class TestBaseDistance:
    def test_euclidean(self):
        assert base_distance(ModelParams(), (0, 0), (3, 4)) == 5.0

    def test_zero(self):
        assert base_distance(H2, (0.3, -0.2), (0.3, -0.2)) == 0.0

    def test_against_quadrature(self):
        # integral of nu along the diameter: 2 artanh(1/2) = ln 3
        numeric, _ = quad(lambda r: 1 / (1 - r * r / 4), 0, 1, epsabs=1e-14)
        assert base_distance(H2, (0, 0), (1, 0)) == pytest.approx(numeric, rel=1e-13)
        assert numeric == pytest.approx(np.log(3.0), rel=1e-14)

    def test_general_kappa_scales(self):
        # M(-4) is M(-1) with lengths halved
        p, q = np.array([0.1, 0.2]), np.array([-0.3, 0.25])
        d1 = base_distance(H2, 2 * p, 2 * q)
        assert base_distance(ModelParams(-4.0), p, q) == pytest.approx(d1 / 2, rel=1e-13)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(1)
        p, q, r = (disc_points(rng, 1000) for _ in range(3))
        for params in (ModelParams(), H2):
            dpq = base_distance(params, p, q)
            assert np.allclose(dpq, base_distance(params, q, p), rtol=0, atol=1e-12)
            assert np.all(base_distance(params, p, r) <= dpq + base_distance(params, q, r) + 1e-9)

    def test_mobius_maps_are_isometries(self):
        rng = np.random.default_rng(2)
        a = np.array([0.4, -0.7])
        p, q = disc_points(rng, 50), disc_points(rng, 50)
        d0 = base_distance(H2, p, q)
        d1 = base_distance(H2, move_to_origin(H2, a, p), move_to_origin(H2, a, q))
        np.testing.assert_allclose(d0, d1, rtol=1e-10)
        np.testing.assert_allclose(move_from_origin(H2, a, move_to_origin(H2, a, p)), p, atol=1e-14)


class TestGeodesics:
    def test_euclidean_segment(self):
        seg = geodesic_between(ModelParams(), (0, 0), (1, 1), 11)
        assert seg.length == pytest.approx(np.sqrt(2), rel=1e-15)
        np.testing.assert_allclose(seg.points[:, 0], seg.points[:, 1], atol=1e-15)

    def test_diameter(self):
        seg = geodesic_between(H2, (-0.9, 0), (0.9, 0), 33)
        np.testing.assert_array_equal(seg.points[:, 1], 0.0)

    def test_arc_is_orthogonal_circle(self):
        seg = geodesic_between(H2, (1, 0), (0, 1), 257)
        pts = seg.points
        # circle through both points orthogonal to |z| = 2: center c with |c|^2 = r^2 + 4
        c = np.array([2.5, 2.5])
        r = np.sqrt(c @ c - 4)
        np.testing.assert_allclose(np.linalg.norm(pts - c, axis=1), r, rtol=1e-12)
        chord = np.sum(base_distance(H2, pts[:-1], pts[1:]))
        assert chord == pytest.approx(seg.length, rel=1e-8)
        assert np.all(np.diff(base_distance(H2, np.broadcast_to(pts[0], pts.shape), pts)) > 0)

    def test_geodesic_equation_residual(self):
        # the geodesic curvature of a conformal-metric curve is
        # (k_e - d(log nu)/dn) / nu; it vanishes along the arc
        seg = geodesic_between(H2, (1, 0), (0, 1), 2049)
        p = seg.points
        d1 = np.gradient(p, axis=0)
        d2 = np.gradient(d1, axis=0)
        speed = np.linalg.norm(d1, axis=1)
        ke = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
        n = np.column_stack([-d1[:, 1], d1[:, 0]]) / speed[:, None]
        grad_log_nu = 0.5 * p / (1 - (p**2).sum(1) / 4)[:, None]
        kg = ke - np.einsum("ij,ij->i", grad_log_nu, n)
        assert np.max(np.abs(kg[5:-5])) < 1e-5

    def test_coincident(self):
        with pytest.raises(CoincidentPointsError):
            geodesic_between(H2, (0.1, 0.1), (0.1, 0.1))

    def test_reflections_are_involutions(self):
        rng = np.random.default_rng(4)
        p = disc_points(rng, 100)
        a, b = np.array([0.2, 0.3]), np.array([-0.5, 0.1])
        for params in (ModelParams(), H2):
            r = geodesic_reflection(params, a, b, p)
            np.testing.assert_allclose(geodesic_reflection(params, a, b, r), p, atol=1e-13)
            s = point_reflection(params, a, p)
            np.testing.assert_allclose(point_reflection(params, a, s), p, atol=1e-13)
            np.testing.assert_allclose(base_distance(params, a, s), base_distance(params, a, p),
                                       rtol=1e-10)


class TestAreaElement:
    def test_examples(self):
        assert graph_area_element(ModelParams(), (0, 0), (0, 0)) == 1.0
        assert graph_area_element(ModelParams(), (5, 1), (3, 4)) == pytest.approx(np.sqrt(26))
        assert graph_area_element(H2, (1, 0), (0, 0)) == pytest.approx(16 / 9, rel=1e-15)

    def test_matches_induced_metric(self):
        rng = np.random.default_rng(5)
        for params in ALL:
            p = disc_points(rng, 50)
            grad = rng.normal(size=(50, 2))
            g = metric_at(params, p)
            T = np.zeros((50, 2, 3))
            T[:, 0, 0] = T[:, 1, 1] = 1.0
            T[:, :, 2] = grad
            induced = np.einsum("nai,nij,nbj->nab", T, g, T)
            np.testing.assert_allclose(graph_area_element(params, p, grad),
                                       np.sqrt(np.linalg.det(induced)), rtol=1e-13)


class TestRescaling:
    def test_lambda_one(self):
        p = np.array([0.3, -0.4])
        np.testing.assert_array_equal(rescaled_metric_at(1.0, PSL, p), metric_at(PSL, p))

    def test_example_mu(self):
        g = rescaled_metric_at(100.0, PSL, (10.0, 0.0))
        mu = 1 / (1 - 100 / 40000)
        assert mu == pytest.approx(1.00250627, abs=1e-8)
        assert g[0, 0] == pytest.approx(mu**2, rel=1e-15)
        np.testing.assert_array_equal(rescaled_metric_at(100.0, PSL, (0, 0)), np.eye(3))

    def test_homothety(self):
        np.testing.assert_array_equal(homothety(2.0, (0.5, 0, 1)), (1, 0, 2))
        p = np.array([0.3, -0.7, 2.5])
        np.testing.assert_allclose(homothety(1 / 3, homothety(3.0, p)), p, rtol=1e-15)
        with pytest.raises(ValueError):
            homothety(0.0, p)

    def test_pullback_example(self):
        lhs, rhs = pullback_check(3.0, H2, (0.1, 0.2, 0.0), (1, 0, 0), (1, 0, 0))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_decay_towards_identity(self):
        p = np.array([[1.0, 0.5, 0.0]])
        dev = [np.abs(rescaled_metric_at(lam, PSL, p) - np.eye(3)).max() for lam in (10, 100, 1000)]
        assert dev[0] > dev[1] > dev[2]
        assert dev[1] * 100 <= 1.2 * dev[0] * 10
