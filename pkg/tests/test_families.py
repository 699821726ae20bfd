import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import fig2_region_verdicts, hankel_min_eig_mp, two_atomic_weights_mp
from strategies import fig2_general
from shiftlab import (
    AtomicMeasure1D,
    ConstructionError,
    HypothesisError,
    LatticeWindow,
    Q_TILDE,
    WeightSequence,
    build_example46,
    build_fig2_family,
    build_fig2_general,
    build_quasinormal_from_row,
    check_commutativity,
    example46,
    example46_crossing,
    example46_verdicts,
    fig2_subnormal,
    fig2_toral_hyponormal,
    is_spherical_fixed_point,
    k_hyponormal,
    moment,
    six_point_test,
    spherical,
    thm311_check,
    toral,
)
from shiftlab.families import (
    fig2_berger_measure,
    search_toral_loss,
    spherical_six_point_boundary,
    thm311_witness,
    toral_weights,
)
from shiftlab.positivity import hankel_sweep

W = LatticeWindow
delta1 = AtomicMeasure1D.dirac(1.0)
half_half = AtomicMeasure1D([(1.0, 0.5), (2.0, 0.5)])
grid = [i / 10 for i in range(1, 10)]


class TestFig2:
    @pytest.mark.parametrize("x", grid)
    @pytest.mark.parametrize("y", grid)
    def test_delta1_closed_form(self, x, y):
        assert bool(fig2_subnormal(x, y, delta1)) == (x <= math.sqrt(1 / (2 - y * y)))

    def test_flat_member(self):
        d = build_fig2_family(1.0, 1.0, delta1)
        a, b = d.weights(W(5, 5))
        assert np.all(a == 1.0) and np.all(b == 1.0)
        assert fig2_subnormal(1.0, 1.0, delta1)
        assert d.tail.berger.atoms == (((1.0, 1.0), 1.0),)

    def test_two_atomic_member(self):
        r = fig2_subnormal(0.8, 0.5, half_half)
        assert r and r.rho == 0.75
        assert r.value == pytest.approx(0.64 * 0.75 * (2 - 0.25 * 0.75), rel=1e-15)

    def test_hypotheses(self):
        with pytest.raises(HypothesisError):
            fig2_subnormal(1.2, 0.5, delta1)
        with pytest.raises(HypothesisError):
            fig2_subnormal(0.5, 1.2, delta1)
        assert not fig2_berger_measure(0.9, 0.5, delta1)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            build_fig2_family(0.0, 0.5, delta1)

    def test_general_constraint(self):
        with pytest.raises(ValueError, match="tau_0"):
            build_fig2_general(0.5, 0.8, 0.5, 0.7, 0.4, 1.0, 1.0)

    def test_core_is_tensor(self):
        omega = WeightSequence((0.6, 0.8), (0.9,))
        d = build_fig2_family(0.5, 0.4, omega=omega)
        assert all(d.alpha(k1, k2) == omega(k1 - 1) for k1 in range(1, 6) for k2 in range(1, 6))
        assert all(d.beta(k1, k2) == omega(k2 - 1) for k1 in range(1, 6) for k2 in range(1, 6))

    @given(fig2_general())
    def test_general_commutes(self, d):
        r = check_commutativity(d, W(6, 6))
        assert r.max_relative < 1e-12

    @pytest.mark.parametrize("xi", [delta1, half_half, AtomicMeasure1D([(0.5, 0.3), (1.0, 0.3), (1.5, 0.4)])])
    def test_berger_moments_match_weights(self, xi):
        for x0 in (0.3, 0.5, 0.7):
            for a in (0.2, 0.5, 0.8):
                if not fig2_subnormal(x0, a, xi):
                    continue
                d = build_fig2_family(x0, a, xi)
                mu = d.tail.berger
                assert mu is not None and mu.total == pytest.approx(1.0, abs=1e-13)
                for k in W(4, 4):
                    assert mu.moment(*k) == pytest.approx(moment(d, k), rel=1e-11)

    def test_no_berger_measure_when_not_subnormal(self):
        assert build_fig2_family(0.9, 0.5, delta1).tail.berger is None

    @settings(max_examples=25)
    @given(st.floats(0.05, 0.99), st.floats(0.05, 0.99))
    def test_subnormal_members_are_3_hyponormal(self, x, y):
        if not fig2_subnormal(x, y, delta1):
            return
        d = build_example46(x, y)
        for k in (1, 2, 3):
            r = k_hyponormal(d, k, W(2, 2))
            assert r and r.certifying


class TestToralGap:
    def test_delta1(self):
        c = thm311_check(delta1)
        assert c.value == 1.0 and c.holds

    def test_equal_parameters(self):
        for xi in (delta1, half_half):
            assert fig2_toral_hyponormal(0.7, 0.7, xi)

    @given(st.floats(0.01, 0.99), st.floats(1.01, 6.0))
    def test_two_atomic_closed_form(self, s, q):
        c = thm311_check(AtomicMeasure1D([(1.0, 1 - s), (q, s)]))
        assert c.two_atomic_expression == pytest.approx(c.value, rel=1e-12)
        assert c.q_within_threshold == (q <= Q_TILDE)
        if q <= Q_TILDE:
            assert c.holds

    def test_witness(self):
        x0, a = thm311_witness(delta1)
        assert 0.25 < x0 * x0 <= 0.5 + 1e-15 and 0 < a < 2 * x0 - 1
        assert fig2_subnormal(x0, a, delta1)
        v = six_point_test(toral(build_fig2_family(x0, a, delta1)))
        assert not v and v.min_eigenvalue < -1e-8

    @pytest.mark.parametrize("x", grid)
    @pytest.mark.parametrize("y", grid)
    def test_toral_verdict_on_delta1(self, x, y):
        # a = y, omega_1 = 1: the toral transform is hyponormal iff x <= (1 + y) / 2
        expected = fig2_region_verdicts(x, y)[2]
        if abs(x - (1 + y) / 2) < 1e-6:
            return
        assert fig2_toral_hyponormal(x, y, delta1) == expected
        assert bool(k_hyponormal(toral(build_example46(x, y)), 1, W(2, 2))) == expected


class TestExample46:
    def test_values(self):
        c = example46(0.8)
        assert c.s == pytest.approx(0.857493, abs=1e-6)
        assert c.h == pytest.approx(0.905539, abs=1e-6)
        assert c.ca == pytest.approx(0.9, abs=1e-15)
        assert c.pa == pytest.approx(0.970181, abs=1e-6)

    def test_crossing(self):
        q = example46_crossing()
        c = example46(q)
        assert q == pytest.approx(0.52138, abs=5e-6)
        assert c.ca == pytest.approx(c.s, abs=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            example46(1.5)
        with pytest.raises(ValueError):
            example46_verdicts(0.5, 1.0)

    @pytest.mark.parametrize("x", grid)
    @pytest.mark.parametrize("y", grid)
    def test_verdicts(self, x, y):
        assert example46_verdicts(x, y).as_tuple()[:3] == fig2_region_verdicts(x, y)

    @pytest.mark.parametrize("y", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_spherical_boundary_by_bisection(self, y):
        """The closed-form spherical boundary against a root of the Six-Point
        minimum eigenvalue found numerically."""
        from scipy.optimize import brentq

        def f(x):
            return six_point_test(spherical(build_example46(x, y))).min_eigenvalue

        root = brentq(f, 0.5, 0.999, xtol=1e-14)
        assert root == pytest.approx(spherical_six_point_boundary(y), abs=1e-9)

    @pytest.mark.parametrize("y", [0.2, 0.5, 0.8])
    def test_spherical_verdict_straddles_boundary(self, y):
        b = spherical_six_point_boundary(y)
        assert k_hyponormal(spherical(build_example46(b - 1e-5, y)), 1, W(2, 2))
        if b + 1e-5 < 1:
            assert not k_hyponormal(spherical(build_example46(b + 1e-5, y)), 1, W(2, 2))

    def test_reference_spherical_curve_disagrees(self):
        # between the derived boundary and the reference curve PA the transform already fails
        y = 0.5
        x = (spherical_six_point_boundary(y) + example46(y).pa) / 2
        assert example46_verdicts(x, y).spherical_hyponormal
        assert not k_hyponormal(spherical(build_example46(x, y)), 1, W(2, 2))


class TestQuasinormal:
    @pytest.mark.parametrize("c", [0.2, 0.5, 0.9])
    def test_constant_row(self, c):
        d = build_quasinormal_from_row(WeightSequence.constant(c))
        a, b = d.weights(W(5, 5))
        assert np.allclose(a, c, rtol=1e-15, atol=0)
        assert np.allclose(b, math.sqrt(1 - c * c), rtol=1e-15, atol=0)

    def test_one_recursion_step(self):
        d = build_quasinormal_from_row(WeightSequence.flat_tail([math.sqrt(1 / 3), math.sqrt(0.5)]))
        assert d.alpha(0, 1) ** 2 == pytest.approx(0.25, rel=1e-14)

    @given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.5, 3.0))
    def test_invariants(self, a_frac, c_frac, big_c):
        c = c_frac * big_c
        row = WeightSequence.flat_tail([a_frac * c, c])
        d = build_quasinormal_from_row(row, big_c)
        w = W(6, 6)
        a, b = d.weights(w)
        assert np.abs(a * a + b * b - big_c * big_c).max() < 1e-12 * big_c * big_c
        assert is_spherical_fixed_point(d, w).gap < 1e-10 * big_c
        assert check_commutativity(d, w).max_relative < 1e-12

    def test_subnormal_and_certified(self):
        d = build_quasinormal_from_row(WeightSequence.flat_tail([0.4, 0.7]))
        mu = d.tail.berger
        for k in W(5, 5):
            assert mu.moment(*k) == pytest.approx(moment(d, k), rel=1e-12)
        for k in (1, 2, 3):
            r = k_hyponormal(d, k, W(3, 3))
            assert r and r.certificate == "berger-measure"

    def test_row_from_measure(self):
        d = build_quasinormal_from_row(AtomicMeasure1D([(0.2, 0.5), (0.6, 0.5)]))
        assert is_spherical_fixed_point(d, W(5, 5))
        assert k_hyponormal(d, 2, W(3, 3))

    def test_failures(self):
        with pytest.raises(ValueError, match="sup"):
            build_quasinormal_from_row(WeightSequence.constant(1.0))
        with pytest.raises(ValueError, match="Hankel"):
            build_quasinormal_from_row(WeightSequence((0.1,), (0.5, 0.9)), check_level=1)
        with pytest.raises(ConstructionError) as exc:
            build_quasinormal_from_row(WeightSequence((), (0.3, 0.9))).weights(W(12, 12))
        assert exc.value.k is not None


class TestTransformLoss:
    def test_one_variable_transform(self):
        assert toral_weights([0.5, 2.0, 0.5, 2.0]) == [1.0, 1.0, 1.0]

    def test_search_finds_witness(self):
        w = search_toral_loss(k=2, trials=200, seed=0)
        assert w is not None
        assert hankel_sweep(w.weights, 2, 40)
        assert w.transform_min_eigenvalue < -1e-8

    def test_witness_in_high_precision(self):
        import mpmath as mp

        w = search_toral_loss(k=2, trials=200, seed=0)
        with mp.workdps(60):
            ws = two_atomic_weights_mp(w.head, w.tail_measure.atoms, 50)
            tw = [mp.sqrt(ws[i] * ws[i + 1]) for i in range(len(ws) - 1)]
            assert all(hankel_min_eig_mp(ws, 2, u) > -1e-40 for u in range(40))
            assert hankel_min_eig_mp(tw, 2, w.transform_failing_u) == pytest.approx(
                w.transform_min_eigenvalue, rel=1e-4)
