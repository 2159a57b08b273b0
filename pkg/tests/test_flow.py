"""Tests for eigenvalue tracking and spectral flow."""

import math

import pytest

from src.engines import ssf_counting
from src.flow import EndpointDegeneracy, crossings, spectral_flow, track_eigenvalues
from src.generator import case_rng, random_hermitian, regular_levels
from src.operators import diagonal, hermitian, make_path, path_at
from src.testfn import step_value

SCALAR = make_path(hermitian([[0.0]]), hermitian([[1.0]]))
# upper curve sqrt(1 - 2r + 3r^2): 1 -> sqrt(2/3) at r = 1/3 -> sqrt(2)
DIPPING = make_path(diagonal([-1.0, 1.0]), hermitian([[0.0, 1 - 1j], [1 + 1j, 0.0]]))


def _seeded_path(case, dim=4):
    rng = case_rng(2024, case)
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim)
    return rng, h0, h1, make_path(h0, h1)


class TestTracking:
    def test_covers_unit_interval(self):
        tracked = track_eigenvalues(DIPPING, 0.1)
        assert tracked.parameters[0] == 0.0
        assert tracked.parameters[-1] == 1.0
        assert tracked.curves.shape == (len(tracked.parameters), 2)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError, match="max_step"):
            track_eigenvalues(SCALAR, 0.0)


class TestCrossings:
    def test_scalar_upward(self):
        [event] = crossings(SCALAR, 0.5, 0.05)
        assert event.direction == 1
        assert event.curve_index == 0
        assert event.r_star == pytest.approx(0.5, abs=1e-9)

    def test_dip_below_and_back(self):
        events = crossings(DIPPING, 0.9, 0.05)
        root = math.sqrt(1.72)
        assert [e.direction for e in events] == [-1, 1]
        assert [e.curve_index for e in events] == [1, 1]
        assert events[0].r_star == pytest.approx((2 - root) / 6, abs=1e-8)
        assert events[1].r_star == pytest.approx((2 + root) / 6, abs=1e-8)

    def test_endpoint_degeneracy(self):
        with pytest.raises(EndpointDegeneracy, match="endpoint eigenvalue"):
            spectral_flow(SCALAR, 1.0)


class TestSpectralFlow:
    def test_scalar(self):
        assert spectral_flow(SCALAR, 0.5) == 1
        assert spectral_flow(SCALAR, 2.0) == 0

    def test_dipping_path(self):
        assert spectral_flow(DIPPING, 0.9) == 0
        assert spectral_flow(DIPPING, 1.2) == 1
        assert spectral_flow(DIPPING, -1.2) == -1

    @pytest.mark.parametrize("case", range(5))
    def test_matches_counting(self, case):
        rng, h0, h1, path = _seeded_path(case)
        xi = ssf_counting(h0, h1)
        for lam in regular_levels(rng, 4, h0, h1):
            assert spectral_flow(path, lam) == step_value(xi, lam)

    @pytest.mark.parametrize("case", range(3))
    def test_path_additivity(self, case):
        rng, h0, h1, path = _seeded_path(case)
        middle = path_at(path, 0.4)
        first = make_path(h0, middle)
        second = make_path(middle, h1)
        for lam in regular_levels(rng, 4, h0, h1, middle):
            assert spectral_flow(first, lam) + spectral_flow(second, lam) == spectral_flow(path, lam)

    @pytest.mark.parametrize("case", range(3))
    def test_stable_under_finer_sampling(self, case):
        rng, h0, h1, path = _seeded_path(case)
        for lam in regular_levels(rng, 3, h0, h1):
            assert spectral_flow(path, lam, 0.05) == spectral_flow(path, lam, 0.025)
