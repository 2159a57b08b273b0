"""Tests for the built-in verification suites."""

import math

import pytest

from src.engines import GuardViolation
from src.models import CheckResult
from src.verify import SUITES, Suite, run_suite, summarize


def _suite(name):
    return [s for s in SUITES if s.name == name]


class TestSuites:
    def test_suite_sizes(self):
        assert {s.name: s.cases for s in SUITES} == {
            "pairs": 200,
            "paths": 100,
            "triples": 100,
            "labeled": 50,
            "continuity": 20,
            "flow": 100,
            "krein": 30,
        }

    @pytest.mark.parametrize("name", [s.name for s in SUITES])
    def test_small_run_passes(self, name):
        results = run_suite(7, 1e-8, cases=3, suites=_suite(name))
        failed = [r for r in results if not r.passed]
        assert failed == []

    def test_counting_checks_are_exact(self):
        results = run_suite(7, 1e-8, cases=5, suites=_suite("triples") + _suite("flow"))
        exact = [r for r in results if r.engine == "counting"]
        assert exact and all(r.residual == 0.0 for r in exact)

    def test_labeled_checks_cover_both_labels(self):
        names = {r.check for r in run_suite(7, 1e-8, cases=2, suites=_suite("labeled"))}
        assert {
            "part-antisymmetry-ac",
            "part-antisymmetry-sing",
            "label-locality-ac",
            "label-locality-sing",
        } <= names

    def test_continuity_residuals_are_nonnegative(self):
        results = run_suite(7, 1e-8, cases=2, suites=_suite("continuity"))
        assert {"weak-continuity-bound", "weak-continuity-monotone"} <= {r.check for r in results}
        assert all(r.residual >= 0.0 for r in results)

    def test_thread_count_does_not_change_results(self):
        picked = _suite("pairs") + _suite("paths")
        serial = run_suite(11, 1e-8, cases=4, threads=1, suites=picked)
        parallel = run_suite(11, 1e-8, cases=4, threads=3, suites=picked)
        assert serial == parallel

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError, match="tol must be positive"):
            run_suite(7, 0.0)


class TestFailures:
    def test_case_error_becomes_infinite_residual(self):
        def broken(seed, index, tol):
            raise GuardViolation("grid too close")

        suite = Suite("broken", 2, broken, (("krein-engine", "krein", lambda tol: 1e-3),))
        [result] = run_suite(7, 1e-8, suites=[suite])
        assert math.isinf(result.residual)
        assert not result.passed

    def test_summary(self):
        ok = CheckResult("trace-formula", "counting", 0.0, 1e-10)
        bad = CheckResult("krein-engine", "krein", 0.5, 1e-3)
        assert summarize([ok]) == "All 1 checks passed."
        text = summarize([ok, bad])
        assert text.startswith("VERIFICATION FAILED: 1 of 2")
        assert "krein-engine (krein)" in text
