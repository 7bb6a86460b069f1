import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from systolab.flat_torus import (
    LOEWNER_BOUND,
    Gram2,
    class_length,
    lagrange_reduce,
    loewner_ratio,
    moduli_point,
    shortest_vector,
    slice_gram,
    torus_diameter,
)

from oracles import brute_covering_radius, brute_shortest

SQRT2_OVER_2 = 0.7071067811865476
INV_SQRT3 = 0.5773502691896258

IDENTITY = Gram2(1.0, 0.0, 1.0)
HEXAGONAL = Gram2(1.0, 0.5, 1.0)


def pd_grams(draw):
    a = draw(st.floats(0.1, 10.0))
    d = draw(st.floats(0.1, 10.0))
    # keep a safe margin from degeneracy so oracles stay valid
    frac = draw(st.floats(-0.9, 0.9))
    b = frac * math.sqrt(a * d)
    return Gram2(a, b, d)


class TestSliceGram:
    def test_entries_at_half(self):
        g = slice_gram(0.5)
        assert g.a == 1.25 and g.b == -0.5 and g.d == 1.0
        assert g.det == 1.0

    def test_det_one_for_all_xhat(self):
        for xhat in np.arange(0.0, 10.0001, 0.05):
            assert abs(slice_gram(float(xhat)).det - 1.0) <= 1e-12

    def test_rejects_nothing_but_pd(self):
        with pytest.raises(ValueError):
            Gram2(1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            Gram2(-1.0, 0.0, 1.0)


class TestShortestVector:
    def test_identity(self):
        ell, v = shortest_vector(IDENTITY)
        assert ell == 1.0
        assert v in ((0, 1), (1, 0))

    def test_slice_is_one_for_integer_j(self):
        # the fiber circle always realizes the systole of a cross-section
        for j in range(0, 65):
            ell, _ = shortest_vector(slice_gram(float(j)))
            assert abs(ell - 1.0) <= 1e-12

    def test_matches_brute_force_on_slices(self):
        for xhat in [0.0, 0.3, 0.5, 1.7, 2.3, 5.5, 7.85]:
            g = slice_gram(xhat)
            ours, _ = shortest_vector(g)
            brute, _ = brute_shortest(g.matrix(), int(math.ceil(xhat)) + 2)
            assert abs(ours - brute) <= 1e-12

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_matches_brute_force_random(self, data):
        g = pd_grams(data.draw)
        ours, coeffs = shortest_vector(g)
        brute, _ = brute_shortest(g.matrix(), 30)
        assert abs(ours - brute) <= 1e-9 * max(1.0, brute)
        # the returned coefficients realize the returned length
        assert abs(class_length(g, coeffs) - ours) <= 1e-12 * max(1.0, ours)

    @settings(max_examples=60, deadline=None)
    @given(st.data(), st.floats(0.5, 4.0))
    def test_scaling_covariance(self, data, c):
        g = pd_grams(data.draw)
        scaled = Gram2(c * g.a, c * g.b, c * g.d)
        ell, _ = shortest_vector(g)
        ell_scaled, _ = shortest_vector(scaled)
        assert ell_scaled == pytest.approx(math.sqrt(c) * ell, rel=1e-12)


class TestClassLength:
    def test_sqrt5(self):
        assert class_length(slice_gram(2.0), (1, 0)) == pytest.approx(math.sqrt(5.0), abs=1e-15)

    def test_slide_class_is_unit_exactly(self):
        # t(1,j) A (1,j) = 1 + j^2 - 2j^2 + j^2 = 1, exact in doubles
        for j in range(1, 65):
            assert class_length(slice_gram(float(j)), (1, j)) == 1.0


class TestDiameter:
    def test_identity_half_diagonal(self):
        assert torus_diameter(IDENTITY) == pytest.approx(SQRT2_OVER_2, abs=1e-15)

    def test_hexagonal(self):
        assert torus_diameter(HEXAGONAL) == pytest.approx(INV_SQRT3, abs=1e-15)

    def test_rectangular_degenerate(self):
        g = Gram2(1.0, 0.0, 4.0)
        assert torus_diameter(g) == pytest.approx(math.sqrt(5.0) / 2.0, abs=1e-12)

    def test_slice_diameters_below_one(self):
        for xhat in np.arange(0.0, 10.0001, 0.05):
            assert torus_diameter(slice_gram(float(xhat))) < 1.0

    def test_slice_maximum_is_at_integer_offsets(self):
        # cross-section shape depends only on frac(xhat); sup over the family
        # is sqrt(2)/2, attained when xhat is an integer
        vals = [torus_diameter(slice_gram(x)) for x in np.arange(0.0, 6.0, 0.01)]
        assert max(vals) == pytest.approx(SQRT2_OVER_2, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_against_sampled_covering_radius(self, data):
        g = pd_grams(data.draw)
        d = torus_diameter(g)
        sampled = brute_covering_radius(g.matrix(), n=160)
        assert sampled <= d + 1e-9
        assert d - sampled <= 0.05 * d

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_at_least_packing_radius(self, data):
        g = pd_grams(data.draw)
        ell, _ = shortest_vector(g)
        assert torus_diameter(g) >= ell / 2.0 - 1e-12


class TestModuli:
    def test_slices_lie_on_unit_height_segment(self):
        for xhat in np.arange(0.0, 10.0001, 0.05):
            s, t = moduli_point(slice_gram(float(xhat)))
            frac = xhat - round(xhat)
            assert t == pytest.approx(1.0, abs=1e-12)
            assert abs(s) <= 0.5 + 1e-12
            assert abs(s) == pytest.approx(abs(frac), abs=1e-9)

    def test_hexagonal_corner(self):
        s, t = moduli_point(HEXAGONAL)
        assert s == pytest.approx(-0.5, abs=1e-12)
        assert t == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_lands_in_fundamental_domain(self, data):
        g = pd_grams(data.draw)
        s, t = moduli_point(g)
        assert t > 0.0
        assert abs(s) <= 0.5 + 1e-12
        assert s * s + t * t >= 1.0 - 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.data(), st.floats(0.5, 4.0))
    def test_scale_invariant(self, data, c):
        g = pd_grams(data.draw)
        scaled = Gram2(c * g.a, c * g.b, c * g.d)
        p1, p2 = moduli_point(g), moduli_point(scaled)
        assert p1.t == pytest.approx(p2.t, abs=1e-9)
        if abs(p1.s * p1.s + p1.t * p1.t - 1.0) <= 1e-9 or abs(abs(p1.s) - 0.5) <= 1e-9:
            # boundary of the fundamental domain: s and -s are identified
            assert abs(p1.s) == pytest.approx(abs(p2.s), abs=1e-9)
        else:
            assert p1.s == pytest.approx(p2.s, abs=1e-9)


class TestLoewner:
    def test_hexagonal_attains_bound(self):
        assert loewner_ratio(HEXAGONAL) == pytest.approx(LOEWNER_BOUND, abs=1e-12)

    def test_identity(self):
        assert loewner_ratio(IDENTITY) == pytest.approx(1.0, abs=1e-15)

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_bound_holds(self, data):
        g = pd_grams(data.draw)
        assert loewner_ratio(g) <= LOEWNER_BOUND + 1e-12


class TestReduction:
    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_reduced_basis_properties(self, data):
        g = pd_grams(data.draw)
        red, U = lagrange_reduce(g)
        assert abs(round(float(np.linalg.det(U)))) == 1
        assert red.a <= red.d + 1e-12
        assert 2.0 * abs(red.b) <= red.a + 1e-9
        # U^T G U reproduces the reduced Gram
        got = U.T.astype(float) @ g.matrix() @ U.astype(float)
        assert np.allclose(got, red.matrix(), atol=1e-9)
