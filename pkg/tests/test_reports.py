"""Tests for CSV reports."""

import os
import tempfile

import pytest

from src.models import CheckResult, CrossingEvent, StepFunction
from src.reports import (
    ReportFormatError,
    comparison_to_csv,
    crossings_to_csv,
    grid_to_csv,
    quantities_to_csv,
    read_step,
    report_to_csv,
    step_from_csv,
    step_to_csv,
    write_step,
)
from src.testfn import make_step


class TestStepCsv:
    def test_schema(self):
        xi = make_step([0.0, 1.0], [1])
        assert step_to_csv(xi) == "breakpoint,value\n0,1\n1,0\n"

    def test_zero_function(self):
        assert step_to_csv(StepFunction()) == "breakpoint,value\n"
        assert step_from_csv("breakpoint,value\n") == StepFunction()

    def test_round_trip_is_exact(self):
        xi = make_step([-2 ** 0.5, -1.0 / 3.0, 0.1, 1e-17 + 1.0], [-1, 2, 1])
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "xi.csv")
            write_step(path, xi)
            assert read_step(path) == xi

    def test_wrong_header(self):
        with pytest.raises(ReportFormatError, match="header"):
            step_from_csv("lambda,value\n0,1\n1,0\n")

    def test_nonzero_final_row(self):
        with pytest.raises(ReportFormatError, match="final row"):
            step_from_csv("breakpoint,value\n0,1\n1,1\n")

    def test_malformed_row(self):
        with pytest.raises(ReportFormatError, match="malformed"):
            step_from_csv("breakpoint,value\n0,one\n1,0\n")

    def test_missing_file(self):
        with pytest.raises(ReportFormatError, match="not found"):
            read_step("/nonexistent/xi.csv")


class TestTables:
    def test_report(self):
        results = [
            CheckResult("trace-formula", "counting", 0.1, 0.5),
            CheckResult("krein-engine", "krein", float("inf"), 1e-3),
        ]
        lines = report_to_csv(results).splitlines()
        assert lines[0] == "check,engine,residual,bound,pass"
        assert lines[1] == "trace-formula,counting,0.10000000000000001,0.5,true"
        assert lines[2] == "krein-engine,krein,inf,0.001,false"

    def test_crossings(self):
        text = crossings_to_csv([CrossingEvent(0.5, 0, 1)])
        assert text == "r_star,curve_index,direction\n0.5,0,1\n"

    def test_grid(self):
        assert grid_to_csv([(0.5, 0.9999)]) == "lambda,xi_estimate\n0.5,0.99990000000000001\n"

    def test_quantities(self):
        assert quantities_to_csv([("ac", 0.25)]) == "quantity,value\nac,0.25\n"

    def test_comparison(self):
        text = comparison_to_csv([(0.5, 1, 1.0, 0.5)])
        assert text == "lambda,counting,averaging,krein\n0.5,1,1,0.5\n"
