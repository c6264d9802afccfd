import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jslab.boundary import (
    DomainSpec,
    boundary_curve_at_level,
    check_jenkins_serrin,
    enumerate_admissible_polygons,
    make_arc,
    make_polygon,
    polygon_count,
    polygon_measures,
    regularize_data,
    validate_domain,
)
from jslab.errors import DomainError, PolygonNotAdmissibleError
from jslab.geometry import ModelParams

E = ModelParams()
H2 = ModelParams(-1.0)
SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def regular_polygon(params, k, radius, kinds):
    th = 2 * np.pi * np.arange(k) / k
    return DomainSpec.polygon(params, np.column_stack([radius * np.cos(th), radius * np.sin(th)]),
                              kinds, data={i: 0.0 for i, c in enumerate(kinds) if c == "C"})


class TestValidation:
    def test_alternating_square(self, unit_square_abab):
        assert validate_domain(unit_square_abab) is unit_square_abab

    def test_adjacent_labels(self):
        spec = DomainSpec.polygon(E, SQUARE, "AABC", data={3: 0.0})
        with pytest.raises(DomainError) as err:
            validate_domain(spec)
        assert err.value.kind == "adjacent-same-label"
        assert err.value.where == ("vertex", 1)

    def test_l_shape_is_not_convex(self):
        verts = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
        spec = DomainSpec.polygon(E, verts, "ABABAB")
        with pytest.raises(DomainError) as err:
            validate_domain(spec)
        assert err.value.kind == "non-convex-domain"
        # the reflex corner at (1, 1) sits between arcs 2 and 3
        assert err.value.where in (("arc", 2), ("arc", 3), ("vertex", 3))

    def test_self_crossing(self):
        spec = DomainSpec.polygon(E, [(0, 0), (1, 1), (1, 0), (0, 1)], "ABAB")
        with pytest.raises(DomainError) as err:
            validate_domain(spec)
        assert err.value.kind in ("non-jordan-boundary", "non-convex-domain")

    def test_hyperbolic_geodesic_square_is_convex(self):
        validate_domain(regular_polygon(H2, 4, 1.0, "ABAB"))

    def test_data_must_be_finite(self):
        with pytest.raises(DomainError):
            make_arc(E, "C", (0, 0), (1, 0), data=lambda s: 1 / s)

    def test_ab_arcs_take_no_data(self):
        with pytest.raises(DomainError):
            make_arc(E, "A", (0, 0), (1, 0), data=1.0)


class TestPolygons:
    def test_square_measures(self):
        spec = DomainSpec.polygon(E, SQUARE, "ABAB")
        assert polygon_measures(spec, (0, 1, 2, 3)) == pytest.approx((2, 2, 4))
        assert polygon_measures(spec, (0, 1, 2)) == pytest.approx((1, 1, 2 + math.sqrt(2)))

    def test_no_boundary_sides(self):
        spec = regular_polygon(E, 6, 1.0, "ABABAB")
        a, b, g = polygon_measures(spec, (0, 2, 4))
        assert (a, b) == (0, 0) and g == pytest.approx(3 * math.sqrt(3))

    def test_not_admissible(self):
        spec = DomainSpec.polygon(E, SQUARE, "ACCC", data={i: 0.0 for i in (1, 2, 3)})
        with pytest.raises(PolygonNotAdmissibleError):
            make_polygon(spec, (0, 1, 2))
        with pytest.raises(PolygonNotAdmissibleError):
            make_polygon(DomainSpec.polygon(E, SQUARE, "ABAB"), (0, 2, 1))

    def test_square_enumeration(self):
        polys = enumerate_admissible_polygons(DomainSpec.polygon(E, SQUARE, "ABAB"))
        assert [len(p.vertices) for p in polys] == [3, 3, 3, 3, 4]

    def test_two_endpoints_only(self):
        spec = DomainSpec.polygon(E, [(0, 0), (1, 0), (1, 1)], "ACC", data={1: 0.0, 2: 0.0})
        assert enumerate_admissible_polygons(spec) == []

    def test_hexagon_count(self):
        spec = regular_polygon(E, 6, 1.0, "ABABAB")
        assert len(enumerate_admissible_polygons(spec)) == 42 == polygon_count(6)

    @pytest.mark.parametrize("k", range(3, 9))
    def test_subset_formula(self, k):
        kinds = ("AB" * k)[:k] if k % 2 == 0 else ("AB" * k)[:k - 1] + "C"
        spec = regular_polygon(E, k, 1.0, kinds)
        ends = len(spec.endpoint_indices())
        assert len(enumerate_admissible_polygons(spec)) == polygon_count(ends)
        assert polygon_count(ends) == sum(math.comb(ends, j) for j in range(3, ends + 1))

    def test_truncation_warns_and_is_inconclusive(self):
        spec = regular_polygon(E, 8, 1.0, "ABABABAB")
        with pytest.warns(RuntimeWarning):
            assert len(enumerate_admissible_polygons(spec, max_count=10)) == 10
        verdict = check_jenkins_serrin(spec, max_count=10)
        assert verdict.inconclusive and not verdict.solvable

    def test_alpha_beta_bounded_by_gamma(self):
        spec = regular_polygon(H2, 8, 1.2, "ABACABAC")
        for p in enumerate_admissible_polygons(spec):
            a, b, g = polygon_measures(spec, p)
            assert a + b <= g + 1e-12


class TestVerdict:
    def test_scherk_square(self):
        v = check_jenkins_serrin(DomainSpec.polygon(E, SQUARE, "ABAB"))
        assert v.solvable and v.witnesses == () and v.balance == pytest.approx((2, 2))
        assert v.polygons_checked == 5

    def test_long_rectangle(self):
        spec = DomainSpec.polygon(E, [(0, 0), (2, 0), (2, 0.5), (0, 0.5)], "ACAC",
                                  data={1: 0.0, 3: 0.0})
        v = check_jenkins_serrin(spec)
        assert not v.solvable
        w = [w for w in v.witnesses if w.polygon == (0, 1, 2, 3)][0]
        assert (2 * w.alpha, w.gamma, w.violated) == (8.0, 5.0, "2alpha<gamma")

    def test_all_a_square(self):
        v = check_jenkins_serrin(DomainSpec.polygon(E, SQUARE, "AAAA"))
        assert not v.solvable
        assert v.witnesses[0].violated == "alpha(Gamma)=beta(Gamma)"
        assert v.balance == (4.0, 0.0)
        assert v.label_violations == (0, 1, 2, 3)

    def test_marginal_flag(self):
        # isosceles right triangle: hypotenuse A, legs C; 2 alpha < gamma holds by 2 - sqrt(2)
        spec = DomainSpec.polygon(E, [(0, 0), (1, 0), (0, 1)], "CAC", data={0: 0.0, 2: 0.0})
        assert check_jenkins_serrin(spec).marginal == ()

    def test_hyperbolic_quad(self):
        spec = DomainSpec.polygon(H2, [(1, 0), (0, 1), (-1, 0), (0, -1)], "ABAB")
        assert check_jenkins_serrin(spec).solvable

    @settings(max_examples=30, deadline=None)
    @given(st.integers(4, 7), st.integers(0, 6), st.booleans(),
           st.lists(st.sampled_from("ABC"), min_size=7, max_size=7),
           st.floats(0.4, 1.5))
    def test_relabel_invariance(self, k, shift, swap, labels, radius):
        kinds = "".join(labels[:k])
        if any(kinds[i] == kinds[i - 1] and kinds[i] in "AB" for i in range(k)):
            return
        spec = regular_polygon(H2, k, radius, kinds)
        base = check_jenkins_serrin(spec)
        other = check_jenkins_serrin(spec.relabel(shift % k, swap))
        assert other.solvable == base.solvable
        want = base.swapped() if swap else base
        assert sorted((w.alpha, w.beta, w.violated) for w in other.witnesses) == pytest.approx(
            sorted((w.alpha, w.beta, w.violated) for w in want.witnesses)) or \
            sorted(w.violated for w in other.witnesses) == sorted(w.violated for w in want.witnesses)


class TestRegularize:
    def arc(self, data, limits=(None, None)):
        return make_arc(E, "C", (0, 0), (1, 0), data=data, limits=limits)

    def test_bounded_continuous_unchanged(self):
        arc = self.arc(lambda s: np.sin(3 * s))
        s = np.linspace(0, 1, 101)
        np.testing.assert_array_equal(regularize_data(arc, 2).values(s), np.sin(3 * s))

    def test_clamp(self):
        s = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(regularize_data(self.arc(5.0), 3).values(s), 3.0)

    def test_reciprocal_clamped(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            arc = self.arc(lambda s: 1 / np.maximum(s, 1e-300), limits=(np.inf, None))
        g = regularize_data(arc, 10)
        s = np.linspace(0.001, 1, 1000)
        np.testing.assert_allclose(g.values(s), np.minimum(1 / s, 10))
        assert g.values(np.array([0.0]))[0] == 10

    def test_collar_midpoint(self):
        # sin(1/s) has no limit at 0: liminf -1, limsup 1, midpoint 0
        arc = self.arc(lambda s: np.sin(1 / np.maximum(s, 1e-12)), limits=((-1.0, 1.0), None))
        for n in (2, 5, 20):
            g = regularize_data(arc, n)
            s = np.linspace(0, 1, 20001)
            v = g.values(s)
            inside = s <= 1 / n
            outside = s > 1 / n
            np.testing.assert_array_equal(v[outside], np.sin(1 / s[outside]))
            assert np.all(np.abs(v[inside]) <= 1) and v[0] == 0.0
            # continuity across the collar edge
            assert np.max(np.abs(np.diff(v))) < 0.05

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.integers(3, 40))
    def test_identity_for_large_n(self, a, b, n):
        arc = self.arc(lambda s: a + b * s * s)
        s = np.linspace(0, 1, 33)
        np.testing.assert_array_equal(regularize_data(arc, n).values(s), a + b * s * s)


class TestLift:
    def test_scherk_level_one(self):
        spec = DomainSpec.polygon(E, SQUARE, "ABAB")
        curve = boundary_curve_at_level(spec, 1)
        assert len(curve.vertical_segments) == 4
        for v, lo, hi in curve.vertical_segments:
            assert (lo, hi) == (-1.0, 1.0)
        assert set(np.unique(curve.points[:, 2])) == {-1.0, 1.0}

    def test_continuous_c_data(self):
        data = {0: lambda s: s, 1: lambda s: 1 - s, 2: lambda s: s, 3: lambda s: 1 - s}
        spec = DomainSpec.polygon(E, SQUARE, "CCCC", data=data)
        assert boundary_curve_at_level(spec, 3).vertical_segments == ()

    def test_c_meets_a(self):
        spec = DomainSpec.polygon(E, SQUARE, "ACBC", data={1: 0.5, 3: -0.25})
        curve = boundary_curve_at_level(spec, 4)
        segs = {v: (lo, hi) for v, lo, hi in curve.vertical_segments}
        assert segs[1] == (0.5, 4.0) and segs[0] == (-0.25, 4.0)

    def test_projection_is_boundary(self):
        spec = DomainSpec.polygon(H2, [(1, 0), (0, 1), (-1, 0), (0, -1)], "ABAB")
        curve = boundary_curve_at_level(spec, 2)
        poly = spec.boundary_polyline()
        for p in curve.points[:, :2]:
            assert np.min(np.linalg.norm(poly - p, axis=1)) < 1e-12
