"""CSV files written and read by the CLI: step functions, residual reports, tables."""

import csv
import io
import os
from typing import Iterable, List, Sequence, Tuple

from src.models import CheckResult, CrossingEvent, SpectralShiftError, StepFunction
from src.testfn import make_step

STEP_HEADER = ("breakpoint", "value")
REPORT_HEADER = ("check", "engine", "residual", "bound", "pass")


class ReportFormatError(SpectralShiftError):
    """Raised when a CSV file does not follow the expected schema."""


def fmt(x: float) -> str:
    """17 significant digits, enough for an exact float round trip."""
    return f"{x:.17g}"


def step_to_csv(xi: StepFunction) -> str:
    """One row per breakpoint carrying the value on the piece it starts; last row has 0."""
    rows = [STEP_HEADER]
    for k, b in enumerate(xi.breakpoints):
        value = xi.values[k] if k < len(xi.values) else 0
        rows.append((fmt(b), str(value)))
    return _render(rows)


def step_from_csv(text: str) -> StepFunction:
    """Inverse of ``step_to_csv``.

    Raises:
        ReportFormatError: On a wrong header, unparseable rows or a nonzero final value.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or tuple(cell.strip() for cell in rows[0]) != STEP_HEADER:
        raise ReportFormatError(f"expected header {','.join(STEP_HEADER)}")
    try:
        breakpoints = [float(row[0]) for row in rows[1:]]
        values = [int(row[1]) for row in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise ReportFormatError(f"malformed step function row: {exc}") from exc
    if not breakpoints:
        return StepFunction()
    if values[-1] != 0:
        raise ReportFormatError("final row must carry value 0")
    try:
        return make_step(breakpoints, values[:-1])
    except ValueError as exc:
        raise ReportFormatError(str(exc)) from exc


def write_step(path: str, xi: StepFunction) -> None:
    _write(path, step_to_csv(xi))


def read_step(path: str) -> StepFunction:
    if not os.path.isfile(path):
        raise ReportFormatError(f"step function file not found: {path}")
    with open(path, "r") as f:
        return step_from_csv(f.read())


def report_to_csv(results: Iterable[CheckResult]) -> str:
    rows = [REPORT_HEADER]
    for r in results:
        rows.append((r.check, r.engine, fmt(r.residual), fmt(r.bound), "true" if r.passed else "false"))
    return _render(rows)


def crossings_to_csv(events: Sequence[CrossingEvent]) -> str:
    rows = [("r_star", "curve_index", "direction")]
    rows.extend((fmt(e.r_star), str(e.curve_index), str(e.direction)) for e in events)
    return _render(rows)


def grid_to_csv(points: Sequence[Tuple[float, float]]) -> str:
    rows = [("lambda", "xi_estimate")]
    rows.extend((fmt(lam), fmt(value)) for lam, value in points)
    return _render(rows)


def quantities_to_csv(quantities: Sequence[Tuple[str, float]]) -> str:
    rows = [("quantity", "value")]
    rows.extend((name, fmt(value)) for name, value in quantities)
    return _render(rows)


def comparison_to_csv(rows_in: Sequence[Tuple[float, int, float, float]]) -> str:
    rows = [("lambda", "counting", "averaging", "krein")]
    rows.extend((fmt(lam), str(c), fmt(a), fmt(k)) for lam, c, a, k in rows_in)
    return _render(rows)


def write_text(path: str, text: str) -> None:
    _write(path, text)


# -- internal helpers ---------------------------------------------------------


def _render(rows: List[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent and not os.path.isdir(parent):
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
