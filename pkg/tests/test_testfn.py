"""Tests for test functions, step densities and their pairings."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.models import StepFunction
from src.testfn import (
    FAMILIES,
    evaluate,
    evaluate_array,
    format_test_function,
    make_step,
    make_test_function,
    pair_density,
    pair_derivative,
    parse_test_function,
    step_abs_integral,
    step_add,
    step_combine,
    step_integral,
    step_negate,
    step_shift,
    step_value,
    sup_norm,
)
from src.quadrature import integrate

UNIT = make_step([0.0, 1.0], [1])


def _family(name, a=-1.0, b=1.0, amplitude=1.0):
    if name == "plateau-bump":
        return make_test_function(name, a, b, amplitude, (a + 0.25 * (b - a), b - 0.25 * (b - a)))
    return make_test_function(name, a, b, amplitude)


def _midpoint_oracle(xi, f, nodes=1_000_000):
    """Midpoint rule on every piece of xi inside the support of f."""
    a, b = f.support
    total = 0.0
    for k, v in enumerate(xi.values):
        lo, hi = max(xi.breakpoints[k], a), min(xi.breakpoints[k + 1], b)
        if lo >= hi:
            continue
        h = (hi - lo) / nodes
        x = lo + h * (np.arange(nodes) + 0.5)
        total += v * h * float(np.sum(evaluate_array(f, x)))
    return total


class TestMakeTestFunction:
    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown test-function family"):
            make_test_function("gaussian", 0.0, 1.0)

    def test_empty_support(self):
        with pytest.raises(ValueError, match="a < b"):
            make_test_function("smooth-bump", 1.0, 1.0)

    def test_plateau_required_and_inside(self):
        with pytest.raises(ValueError, match="requires a plateau"):
            make_test_function("plateau-bump", 0.0, 1.0)
        with pytest.raises(ValueError, match="a < c <= d < b"):
            make_test_function("plateau-bump", 0.0, 1.0, 1.0, (0.0, 0.5))

    def test_plateau_only_for_plateau_family(self):
        with pytest.raises(ValueError, match="takes no plateau"):
            make_test_function("raised-cosine", 0.0, 1.0, 1.0, (0.2, 0.8))


class TestParse:
    def test_parse_family(self):
        f = parse_test_function("smooth-bump:-1:1:2")
        assert f.family == "smooth-bump"
        assert f.support == (-1.0, 1.0)
        assert f.amplitude == 2.0

    def test_parse_plateau(self):
        f = parse_test_function("plateau:0:4:1:1:3")
        assert f.family == "plateau-bump"
        assert f.plateau == (1.0, 3.0)

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError, match="invalid test function"):
            parse_test_function("raised-cosine:0:x:1")
        with pytest.raises(ValueError, match="expected family"):
            parse_test_function("raised-cosine:0:1")

    def test_format_parses_back(self):
        f = make_test_function("plateau-bump", -0.5, 1.5, 0.75, (0.0, 1.0))
        assert parse_test_function(format_test_function(f)) == f


class TestEvaluate:
    def test_smooth_bump_peak(self):
        assert evaluate(_family("smooth-bump"), 0.0) == pytest.approx(math.exp(-1.0))

    @pytest.mark.parametrize("family", FAMILIES)
    def test_zero_outside_support(self, family):
        f = _family(family)
        for x in (-2.0, -1.0, 1.0, 3.0):
            assert evaluate(f, x) == 0.0
            assert evaluate(f, x, 1) == 0.0

    @pytest.mark.parametrize("family", ("smooth-bump", "raised-cosine", "cubic-spline-hat"))
    def test_slope_vanishes_at_midpoint(self, family):
        assert evaluate(_family(family), 0.0, 1) == pytest.approx(0.0, abs=1e-15)

    def test_spline_branches_meet(self):
        f = _family("cubic-spline-hat")
        assert evaluate(f, 0.5) == pytest.approx(0.25)

    def test_plateau_is_flat(self):
        f = make_test_function("plateau-bump", -1.0, 2.0, 3.0, (0.0, 1.0))
        for x in (0.0, 0.3, 1.0):
            assert evaluate(f, x) == 3.0
            assert evaluate(f, x, 1) == 0.0

    @pytest.mark.parametrize("family", FAMILIES)
    def test_slope_matches_central_differences(self, family):
        rng = np.random.default_rng(17)
        f = _family(family, -1.0, 2.0, 1.5)
        x = rng.uniform(-1.0 + 1e-4, 2.0 - 1e-4, 100)
        h = 1e-5
        fd = (evaluate_array(f, x + h) - evaluate_array(f, x - h)) / (2 * h)
        assert np.max(np.abs(evaluate_array(f, x, 1) - fd)) <= 1e-6

    @pytest.mark.parametrize("family", FAMILIES)
    def test_last_floats_inside_support_stay_finite(self, family):
        rng = np.random.default_rng(23)
        for _ in range(200):
            a = float(rng.uniform(-3.0, 1.0))
            b = a + float(rng.uniform(0.1, 3.0))
            f = _family(family, a, b)
            x = np.array([np.nextafter(a, b), np.nextafter(b, a)])
            assert np.all(np.abs(evaluate_array(f, x)) <= sup_norm(f))
            assert np.all(np.isfinite(evaluate_array(f, x, 1)))

    @pytest.mark.parametrize("family", FAMILIES)
    def test_sup_norm_bounds_samples(self, family):
        f = _family(family, amplitude=-2.0)
        samples = evaluate_array(f, np.linspace(-1.0, 1.0, 2001))
        assert np.max(np.abs(samples)) <= sup_norm(f) + 1e-15
        assert np.max(np.abs(samples)) == pytest.approx(sup_norm(f), rel=1e-6)


class TestStepAlgebra:
    def test_canonical_merge_and_trim(self):
        xi = make_step([0.0, 1.0, 2.0, 3.0, 4.0], [0, 1, 1, 0])
        assert xi == StepFunction(breakpoints=(1.0, 3.0), values=(1,))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError, match="expected 1 values"):
            make_step([0.0, 1.0], [1, 2])
        with pytest.raises(ValueError, match="ascending"):
            make_step([1.0, 0.0], [1])

    def test_value_is_right_open(self):
        xi = make_step([0.0, 1.0, 2.0], [1, -1])
        assert step_value(xi, 0.0) == 1
        assert step_value(xi, 1.0) == -1
        assert step_value(xi, 2.0) == 0
        assert step_value(xi, -0.1) == 0

    def test_integrals(self):
        xi = make_step([0.0, 1.0, 3.0], [1, -2])
        assert step_integral(xi) == -3.0
        assert step_abs_integral(xi) == 5.0

    def test_add_and_negate_cancel(self):
        xi = make_step([0.0, 1.0, 3.0], [1, -2])
        assert step_add(xi, step_negate(xi)) == StepFunction()

    def test_combine_is_exact(self):
        a = make_step([0.0, 2.0], [1])
        b = make_step([1.0, 3.0], [1])
        assert step_combine([(1, a), (-1, b)]) == make_step([0.0, 1.0, 2.0, 3.0], [1, 0, -1])

    def test_shift(self):
        assert step_shift(UNIT, 0.5) == make_step([0.5, 1.5], [1])


class TestPairings:
    def test_density_of_unit_against_plateau(self):
        f = make_test_function("plateau-bump", -0.5, 1.5, 1.0, (0.0, 1.0))
        assert pair_density(UNIT, f, 1e-10) == pytest.approx(1.0, abs=1e-10)

    def test_density_closed_form(self):
        f = make_test_function("raised-cosine", -1.0, 2.0)
        expected = 0.5 + 1.5 * math.sin(math.pi / 3) / math.pi
        assert pair_density(UNIT, f, 1e-12) == pytest.approx(expected, abs=1e-11)

    def test_zero_density_is_exactly_zero(self):
        assert pair_density(StepFunction(), _family("smooth-bump"), 1e-8) == 0.0
        assert pair_derivative(StepFunction(), _family("smooth-bump")) == 0.0

    def test_density_matches_riemann_oracle(self):
        rng = np.random.default_rng(5)
        xi = make_step(np.sort(rng.uniform(-1.0, 1.0, 6)), rng.integers(-3, 4, 5))
        f = make_test_function("smooth-bump", -0.8, 0.9, 1.3)
        assert pair_density(xi, f, 1e-10) == pytest.approx(_midpoint_oracle(xi, f), abs=1e-6)

    def test_derivative_is_endpoint_difference(self):
        f = make_test_function("cubic-spline-hat", -0.5, 1.0)
        assert pair_derivative(UNIT, f) == pytest.approx(evaluate(f, 1.0) - evaluate(f, 0.0), abs=1e-15)

    def test_derivative_matches_quadrature(self):
        xi = make_step([-0.7, -0.1, 0.4, 0.8], [2, -1, 1])
        f = make_test_function("smooth-bump", -1.0, 1.0)
        by_quadrature = sum(
            v * integrate(lambda x: evaluate(f, x, 1), lo, hi, 1e-12)
            for v, lo, hi in zip(xi.values, xi.breakpoints, xi.breakpoints[1:])
        )
        assert pair_derivative(xi, f) == pytest.approx(by_quadrature, abs=1e-8)

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError, match="tol must be positive"):
            pair_density(UNIT, _family("smooth-bump"), 0.0)

    @seed(21)
    @settings(max_examples=40, deadline=None)
    @given(
        cuts=st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=2, max_size=6, unique=True),
        values=st.lists(st.integers(min_value=-3, max_value=3), min_size=5, max_size=5),
        other=st.integers(min_value=-3, max_value=3),
    )
    def test_derivative_is_linear(self, cuts, values, other):
        bps = sorted(cuts)
        a = make_step(bps, values[: len(bps) - 1])
        b = make_step([-0.5, 0.5], [other])
        f = make_test_function("raised-cosine", -1.5, 1.5)
        residual = pair_derivative(step_add(a, b), f) - pair_derivative(a, f) - pair_derivative(b, f)
        assert abs(residual) <= 1e-12

    @seed(22)
    @settings(max_examples=40, deadline=None)
    @given(
        cuts=st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=2, max_size=6, unique=True),
        values=st.lists(st.integers(min_value=-3, max_value=3), min_size=5, max_size=5),
        family=st.sampled_from(FAMILIES),
    )
    def test_density_bounded_by_sup_norm(self, cuts, values, family):
        bps = sorted(cuts)
        xi = make_step(bps, values[: len(bps) - 1])
        f = _family(family, -1.0, 1.5, 0.8)
        assert abs(pair_density(xi, f, 1e-10)) <= step_abs_integral(xi) * sup_norm(f) + 1e-10
