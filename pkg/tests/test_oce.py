import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskhull import (
    Exponential,
    IndicatorNonneg,
    InputError,
    PiecewiseLinear,
    ProbSpace,
    TwoSlope,
    cvar,
    cvar_subdiff,
    entropic,
    entropic_gradient,
    expectation,
    oce_conjugate,
    oce_subdiff,
    oce_value,
    pairing,
    subdiff_contains,
    subdiff_nonempty,
    var_beta,
    worst_case,
    worst_case_subdiff,
)
from support import UTILITIES, box_member, rand_space, rand_vector

INF = math.inf


class TestValue:
    def test_two_slope_flat_minimizer_set(self):
        space = ProbSpace.uniform(2)
        res = oce_value(space, TwoSlope(0.0, -2.0), [1.0, -1.0])
        assert res.value == pytest.approx(1.0, abs=1e-9)
        assert res.attained
        # every shift between the two kinks is optimal
        assert res.minimizer_interval.lo <= -1.0 + 1e-6
        assert res.minimizer_interval.hi >= 1.0 - 1e-6

    def test_constant_position_evaluates_to_negated_constant(self):
        space = ProbSpace(np.array([0.25, 0.75]))
        for _, v in UTILITIES:
            res = oce_value(space, v, [2.0, 2.0])
            assert res.value == pytest.approx(-2.0, abs=1e-9)

    def test_rejects_non_normalized_utility(self):
        space = ProbSpace.uniform(2)
        crooked = PiecewiseLinear(breaks=(0.0,), slopes=(-3.0, -2.0))
        with pytest.raises(InputError):
            oce_value(space, crooked, [1.0, -1.0])

    def test_terminal_unit_slope_gives_flat_ray(self):
        # terminal slope exactly -1: the shift objective becomes constant
        # past the last kink, the minimum -E(X) is attained on a closed ray
        space = ProbSpace.uniform(2)
        v = PiecewiseLinear(breaks=(0.0,), slopes=(-2.0, -1.0))
        res = oce_value(space, v, [1.0, -1.0])
        assert res.value == pytest.approx(-expectation(space, [1.0, -1.0]), abs=1e-9)
        assert res.attained
        assert res.minimizer_interval.hi == INF
        # the recession-slope predicate is what rules this utility out of
        # the subdifferential construction, not the solver flag
        from riskhull import check_attainment_condition

        assert not check_attainment_condition(v)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40)
    def test_axioms_on_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        space = rand_space(rng)
        x = rand_vector(rng, space)
        y = rand_vector(rng, space)
        c = float(rng.uniform(-3, 3))
        t = float(rng.uniform(0, 1))
        for _, v in UTILITIES:
            rx = oce_value(space, v, x).value
            ry = oce_value(space, v, y).value
            rmix = oce_value(space, v, t * x + (1 - t) * y).value
            assert rmix <= t * rx + (1 - t) * ry + 1e-7
            assert oce_value(space, v, x + c).value == pytest.approx(rx - c, abs=1e-7)
            higher = oce_value(space, v, x + np.abs(y)).value
            assert higher <= rx + 1e-7
            assert rx >= -expectation(space, x) - 1e-9


class TestConjugate:
    def test_infinite_off_the_mean_hyperplane(self):
        space = ProbSpace.uniform(2)
        for _, v in UTILITIES:
            assert oce_conjugate(space, v, [-0.5, -0.5]) == INF
            assert oce_conjugate(space, v, [-2.0, 0.5]) == INF

    def test_two_slope_indicator(self):
        space = ProbSpace.uniform(2)
        v = TwoSlope(0.0, -2.0)
        assert oce_conjugate(space, v, [-1.5, -0.5]) == 0.0
        assert oce_conjugate(space, v, [-2.0, 0.0]) == 0.0
        # mean is -1 but one coordinate leaves the slope interval
        assert oce_conjugate(space, v, [-2.5, 0.5]) == INF

    def test_exponential_entropy_form(self):
        space = ProbSpace(np.array([0.4, 0.6]))
        v = Exponential()
        s = np.array([-2.0, -1.0 / 3.0])
        assert expectation(space, s) == pytest.approx(-1.0)
        expected = sum(
            w * (-si * math.log(-si) + si + 1) for w, si in zip(space.weights, s)
        )
        assert oce_conjugate(space, v, s) == pytest.approx(expected, abs=1e-12)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_fenchel_young_inequality(self, seed):
        rng = np.random.default_rng(seed)
        space = rand_space(rng)
        x = rand_vector(rng, space)
        for _, v in UTILITIES:
            box = oce_subdiff(space, v, x)
            s = box_member(space, box, rng)
            if s is None:
                continue
            fy = oce_conjugate(space, v, s) + oce_value(space, v, x).value - pairing(
                space, s, x
            )
            assert abs(fy) <= 1e-7
            assert subdiff_contains(space, box, s)


class TestSubdifferential:
    def test_requires_attainment_condition(self):
        space = ProbSpace.uniform(2)
        v = PiecewiseLinear(breaks=(0.0,), slopes=(-2.0, -1.0))
        with pytest.raises(InputError):
            oce_subdiff(space, v, [1.0, -1.0])

    def test_box_for_two_slope(self):
        space = ProbSpace.uniform(2)
        box = oce_subdiff(space, TwoSlope(0.0, -2.0), [1.0, -1.0])
        reach_lo = sum(w * iv.lo for w, iv in zip(space.weights, box.intervals))
        reach_hi = sum(w * iv.hi for w, iv in zip(space.weights, box.intervals))
        assert reach_lo <= -1.0 <= reach_hi
        assert subdiff_nonempty(space, box)

    def test_membership_needs_mean_and_componentwise(self):
        space = ProbSpace.uniform(3)
        box = worst_case_subdiff(space, [3.0, 1.0, 2.0])
        assert subdiff_contains(space, box, [0.0, -3.0, 0.0])
        assert not subdiff_contains(space, box, [0.0, -2.9, 0.0])  # mean off
        assert not subdiff_contains(space, box, [-0.3, -2.4, -0.3])  # sign off

    def test_reach_contains_minus_one_at_optimal_shift(self):
        # 0 in the subdifferential of the shift objective at its minimizer
        # is exactly the statement that the box reaches mean -1; this is the
        # optimality certificate subdiff_nonempty provides
        rng = np.random.default_rng(11)
        for _ in range(25):
            space = rand_space(rng)
            x = rand_vector(rng, space)
            for _, v in UTILITIES:
                assert subdiff_nonempty(space, oce_subdiff(space, v, x))

    def test_empty_reach_detected_on_suboptimal_box(self):
        from riskhull import Interval, SubdiffBox

        space = ProbSpace.uniform(2)
        stale = SubdiffBox(
            intervals=(Interval.point(0.0), Interval.point(0.0)), lambda_bar=0.0
        )
        assert not subdiff_nonempty(space, stale)


class TestSpecializations:
    def test_cvar_tail_mean(self):
        space = ProbSpace(np.array([0.1, 0.9]))
        res = cvar(space, [-10.0, 1.0], 0.1)
        assert res.value == pytest.approx(10.0, abs=1e-12)

    def test_cvar_equals_two_slope_oce(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            space = rand_space(rng)
            x = rand_vector(rng, space)
            beta = float(rng.uniform(0.05, 0.95))
            direct = cvar(space, x, beta).value
            generic = oce_value(space, TwoSlope(0.0, -1.0 / beta), x).value
            assert direct == pytest.approx(generic, abs=1e-9)

    def test_cvar_shift_objective_minimized_at_var(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            space = rand_space(rng)
            x = rand_vector(rng, space)
            beta = float(rng.uniform(0.05, 0.95))
            v = TwoSlope(0.0, -1.0 / beta)
            lam = var_beta(space, x, beta)
            phi = lam + sum(
                w * v.value(float(xi) + lam) for w, xi in zip(space.weights, x)
            )
            assert phi == pytest.approx(cvar(space, x, beta).value, abs=1e-9)

    def test_cvar_subdiff_contains_tail_indicator(self):
        space = ProbSpace(np.array([0.1, 0.9]))
        box = cvar_subdiff(space, [-10.0, 1.0], 0.1)
        assert subdiff_contains(space, box, [-10.0, 0.0])

    def test_entropic_log_mean_exp(self):
        space = ProbSpace.uniform(2)
        res = entropic(space, [1.0, -1.0])
        assert res.value == pytest.approx(
            math.log((math.exp(-1) + math.e) / 2), abs=1e-12
        )
        assert res.value == pytest.approx(
            oce_value(space, Exponential(), [1.0, -1.0]).value, abs=1e-9
        )

    def test_entropic_handles_large_positions_stably(self):
        space = ProbSpace.uniform(2)
        res = entropic(space, [-800.0, -700.0])
        assert math.isfinite(res.value)
        assert res.value == pytest.approx(800.0 - math.log(2) + math.log(1 + math.exp(-100)), abs=1e-9)

    def test_entropic_gradient_is_boltzmann(self):
        rng = np.random.default_rng(5)
        space = rand_space(rng)
        x = rand_vector(rng, space)
        g = entropic_gradient(space, x)
        assert expectation(space, g) == pytest.approx(-1.0, abs=1e-12)
        box = oce_subdiff(space, Exponential(), x)
        assert subdiff_contains(space, box, g, tol=1e-7)

    def test_worst_case_minimum(self):
        space = ProbSpace.uniform(3)
        res = worst_case(space, [3.0, 1.0, 2.0])
        assert res.value == -1.0
        assert res.value == pytest.approx(
            oce_value(space, IndicatorNonneg(), [3.0, 1.0, 2.0]).value, abs=1e-9
        )
