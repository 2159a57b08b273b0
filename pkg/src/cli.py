"""CLI entry point for the spectral shift toolkit."""

import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Tuple

import click
import numpy as np

from src.decomposition import flatten, make_labeled_path, ssf_part, ssf_singular_by_complement
from src.engines import krein_schedule, ssf_averaging, ssf_averaging_at, ssf_counting, ssf_krein
from src.evidence import append_event, create_event
from src.flow import crossings
from src.loader import ModelParseError, load_config, load_labeled, load_operator
from src.models import EngineChoice, HermitianOperator, JobConfig, PartLabel, SpectralShiftError, TestFunction
from src.operators import check_same_dim, eigenvalues, make_path, path_end, spectral_window
from src.reports import (
    comparison_to_csv,
    crossings_to_csv,
    grid_to_csv,
    quantities_to_csv,
    report_to_csv,
    step_to_csv,
    write_text,
)
from src.testfn import make_test_function, parse_test_function, step_value
from src.verify import run_suite, summarize

logger = logging.getLogger(__name__)

THREADS_ENV = "SPECSHIFT_THREADS"
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


# -- dispatch -----------------------------------------------------------------


def run(config: JobConfig) -> int:
    """Execute one job and return its exit code.

    0 on success, 1 when a verification check exceeds its bound (the report is
    still written), 2 on input, parse, numerical or file errors.
    """
    handler = _HANDLERS.get(config.subcommand)
    try:
        if handler is None:
            raise ValueError(f"unknown subcommand {config.subcommand!r}")
        exit_code, outcome = handler(config)
    except (SpectralShiftError, ValueError, KeyError, OSError) as exc:
        click.echo(f"Error: {config.subcommand}: {type(exc).__name__}: {exc}", err=True)
        exit_code, outcome = 2, "input-error"

    if config.log_path:
        append_event(create_event(config.subcommand, config.inputs, outcome, exit_code), config.log_path)
        logger.info("evidence logged to %s", config.log_path)
    return exit_code


def _run_ssf(config: JobConfig) -> Tuple[int, str]:
    h0, h1 = _load_pair(config)
    if config.engine is EngineChoice.COUNTING:
        text = step_to_csv(ssf_counting(h0, h1))
    elif config.engine is EngineChoice.AVERAGING:
        f = config.phi or default_phi(h0, h1)
        text = quantities_to_csv([("xi_phi", ssf_averaging(make_path(h0, h1), f, config.tol))])
    else:
        grid = grid_points(config.grid) if config.grid else partition_grid(h0, h1)
        estimates = ssf_krein(make_path(h0, h1), krein_schedule(grid, scale=spectral_window(h0, h1)[2]))
        text = grid_to_csv(estimates)
    _emit(config, text)
    return 0, "computed"


def _run_flow(config: JobConfig) -> Tuple[int, str]:
    if config.lam is None:
        raise ValueError("flow needs --lambda")
    h0, h1 = _load_pair(config)
    events = crossings(make_path(h0, h1), config.lam, config.max_step)
    click.echo(str(sum(e.direction for e in events)))
    if config.out:
        write_text(config.out, crossings_to_csv(events))
    return 0, "computed"


def _run_decompose(config: JobConfig) -> Tuple[int, str]:
    path = make_labeled_path(load_labeled(config.inputs["h0"]), load_labeled(config.inputs["v"]))
    flat = flatten(path)
    f = config.phi or default_phi(flat.h0, path_end(flat))
    quantities = [
        ("ac", ssf_part(path, PartLabel.AC, f, config.tol)),
        ("sing", ssf_part(path, PartLabel.SING, f, config.tol)),
        ("total", ssf_averaging(flat, f, config.tol)),
        ("sing_by_complement", ssf_singular_by_complement(path, f, config.tol)),
    ]
    _emit(config, quantities_to_csv(quantities))
    return 0, "computed"


def _run_verify(config: JobConfig) -> Tuple[int, str]:
    results = run_suite(config.seed, config.tol, config.cases, threads=thread_count())
    _emit(config, report_to_csv(results))
    click.echo(summarize(results), err=True)
    if all(r.passed for r in results):
        return 0, "checks-passed"
    return 1, "checks-failed"


def _run_compare(config: JobConfig) -> Tuple[int, str]:
    h0, h1 = _load_pair(config)
    if config.grid:
        levels = grid_points(config.grid)
    elif config.lam is not None:
        levels = [config.lam]
    else:
        levels = partition_grid(h0, h1)
    path = make_path(h0, h1)
    xi = ssf_counting(h0, h1)
    estimates = ssf_krein(path, krein_schedule(levels, scale=spectral_window(h0, h1)[2]))
    rows = [
        (lam, step_value(xi, lam), ssf_averaging_at(path, lam, config.tol), value)
        for lam, value in estimates
    ]
    _emit(config, comparison_to_csv(rows))
    return 0, "computed"


_HANDLERS: Dict[str, Callable[[JobConfig], Tuple[int, str]]] = {
    "ssf": _run_ssf,
    "flow": _run_flow,
    "decompose": _run_decompose,
    "verify": _run_verify,
    "compare-engines": _run_compare,
}


# -- job helpers --------------------------------------------------------------


def default_phi(*ops: HermitianOperator) -> TestFunction:
    """Plateau bump equal to 1 on the joint spectral window, so xi(phi) is the mass of xi."""
    low, high, diameter = spectral_window(*ops)
    return make_test_function(
        "plateau-bump",
        low - 0.5 * diameter,
        high + 0.5 * diameter,
        1.0,
        (low - 0.25 * diameter, high + 0.25 * diameter),
    )


def partition_grid(h0: HermitianOperator, h1: HermitianOperator) -> List[float]:
    """Midpoints of the joint eigenvalue partition plus one level on either side."""
    check_same_dim(h0, h1)
    joint = sorted(set(np.concatenate([eigenvalues(h0), eigenvalues(h1)]).tolist()))
    low, high, diameter = spectral_window(h0, h1)
    mids = [0.5 * (a + b) for a, b in zip(joint, joint[1:])]
    return [low - 0.5 * diameter] + mids + [high + 0.5 * diameter]


def grid_points(grid: Tuple[float, float, int]) -> List[float]:
    a, b, n = grid
    return np.linspace(a, b, n).tolist()


def thread_count() -> int:
    """Worker cap from SPECSHIFT_THREADS, default min(4, cpu count)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if count < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return count


def _load_pair(config: JobConfig) -> Tuple[HermitianOperator, HermitianOperator]:
    h0 = load_operator(config.inputs["h0"])
    h1 = load_operator(config.inputs["h1"])
    check_same_dim(h0, h1)
    return h0, h1


def _emit(config: JobConfig, text: str) -> None:
    if config.out:
        write_text(config.out, text)
        click.echo(f"Written to {config.out}", err=True)
    else:
        click.echo(text, nl=False)


# -- option parsing -----------------------------------------------------------


def _parse_phi(ctx, param, value: Optional[str]) -> Optional[TestFunction]:
    if value is None:
        return None
    try:
        return parse_test_function(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


def _parse_grid(ctx, param, value: Optional[str]) -> Optional[Tuple[float, float, int]]:
    if value is None:
        return None
    parts = value.split(":")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise click.BadParameter(f"expected a:b:n, got {value!r}") from None
    if len(parts) != 3 or n < 1 or (n > 1 and not a < b):
        raise click.BadParameter(f"expected a < b and n >= 1, got {value!r}")
    return a, b, n


def _default_map(raw: dict) -> Dict[str, dict]:
    """Spread top-level keys to every subcommand; nested mappings override per subcommand."""
    def normalize(entries: dict) -> dict:
        out = {}
        for key, value in entries.items():
            name = str(key).replace("-", "_")
            out["lam" if name == "lambda" else name] = value
        return out

    common = normalize({k: v for k, v in raw.items() if not isinstance(v, dict)})
    return {
        name: {**common, **normalize(raw.get(name) or {})}
        for name in _HANDLERS
    }


def _inputs(**paths) -> Dict[str, str]:
    return {name: str(value) for name, value in paths.items() if value is not None}


# -- commands -----------------------------------------------------------------


_tol_option = click.option(
    "--tol",
    default=1e-8,
    show_default=True,
    type=click.FloatRange(min=0.0, min_open=True),
    help="Absolute tolerance for quadrature-based quantities.",
)
_out_option = click.option(
    "--out",
    default=None,
    type=click.Path(),
    help="Output path for the CSV result. Prints to stdout if omitted.",
)
_log_option = click.option(
    "--log",
    "log_path",
    default=None,
    type=click.Path(),
    help="Optional path to the evidence log (JSONL). Appends an entry when provided.",
)
_phi_option = click.option(
    "--phi",
    default=None,
    callback=_parse_phi,
    help="Test function family:a:b:amplitude (or plateau:a:b:amplitude:c:d). "
         "Defaults to a plateau covering the joint spectrum.",
)
_grid_option = click.option(
    "--grid",
    default=None,
    callback=_parse_grid,
    help="Evaluation grid a:b:n (n evenly spaced levels).",
)


def _operator_option(name: str, what: str):
    return click.option(
        f"--{name}",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help=f"{what} (Matrix Market file).",
    )


@click.group()
@click.option(
    "--config",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="YAML file with option defaults, top-level or per subcommand.",
)
@click.option("-v", "--verbose", count=True, help="Log progress to stderr (-vv for debug).")
@click.pass_context
def main(ctx, config, verbose):
    """Spectral shift toolkit -- compute, decompose and verify spectral shift functions."""
    if verbose:
        logging.basicConfig(
            level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
    if config:
        try:
            ctx.default_map = _default_map(load_config(config))
        except ModelParseError as exc:
            click.echo(f"Error: config: ModelParseError: {exc}", err=True)
            sys.exit(2)


@main.command()
@_operator_option("h0", "Unperturbed operator H0")
@_operator_option("h1", "Perturbed operator H1")
@click.option(
    "--engine",
    default=EngineChoice.COUNTING.value,
    show_default=True,
    type=click.Choice([e.value for e in EngineChoice]),
    help="Engine used to realize xi.",
)
@_phi_option
@_tol_option
@_grid_option
@_out_option
@_log_option
def ssf(h0, h1, engine, phi, tol, grid, out, log_path):
    """Compute the spectral shift function of the pair (H0, H1)."""
    config = JobConfig(
        subcommand="ssf",
        inputs=_inputs(h0=h0, h1=h1, engine=engine),
        engine=EngineChoice(engine),
        tol=tol,
        phi=phi,
        grid=grid,
        out=out,
        log_path=log_path,
    )
    sys.exit(run(config))


@main.command()
@_operator_option("h0", "Unperturbed operator H0")
@_operator_option("h1", "Perturbed operator H1")
@click.option("--lambda", "lam", required=True, type=float, help="Level to count crossings through.")
@click.option(
    "--max-step",
    default=0.05,
    show_default=True,
    type=click.FloatRange(min=0.0, min_open=True),
    help="Initial path sampling step in r.",
)
@_out_option
@_log_option
def flow(h0, h1, lam, max_step, out, log_path):
    """Spectral flow of H0 + rV through a level; --out writes the crossings."""
    config = JobConfig(
        subcommand="flow",
        inputs=_inputs(h0=h0, h1=h1, **{"lambda": lam}),
        lam=lam,
        max_step=max_step,
        out=out,
        log_path=log_path,
    )
    sys.exit(run(config))


@main.command()
@click.option("--h0", required=True, type=click.Path(exists=True, dir_okay=False), help="Labeled model manifest for H0.")
@click.option("--v", required=True, type=click.Path(exists=True, dir_okay=False), help="Labeled model manifest for V.")
@_phi_option
@_tol_option
@_out_option
@_log_option
def decompose(h0, v, phi, tol, out, log_path):
    """Split xi(phi) into its AC and SING parts on a block-labeled model."""
    config = JobConfig(
        subcommand="decompose",
        inputs=_inputs(h0=h0, v=v),
        tol=tol,
        phi=phi,
        out=out,
        log_path=log_path,
    )
    sys.exit(run(config))


@main.command()
@click.option("--seed", default=7, show_default=True, type=click.IntRange(0, 2 ** 64 - 1), help="Suite seed.")
@_tol_option
@click.option(
    "--cases",
    default=None,
    type=click.IntRange(min=1),
    help="Cap on cases per suite (defaults to the full suite sizes).",
)
@_out_option
@_log_option
def verify(seed, tol, cases, out, log_path):
    """Run the built-in verification suites and write the residual report."""
    config = JobConfig(
        subcommand="verify",
        inputs=_inputs(seed=seed, tol=tol, cases=cases),
        tol=tol,
        seed=seed,
        cases=cases,
        out=out,
        log_path=log_path,
    )
    sys.exit(run(config))


@main.command("compare-engines")
@_operator_option("h0", "Unperturbed operator H0")
@_operator_option("h1", "Perturbed operator H1")
@_grid_option
@click.option("--lambda", "lam", default=None, type=float, help="Single comparison level.")
@_tol_option
@_out_option
@_log_option
def compare_engines(h0, h1, grid, lam, tol, out, log_path):
    """Tabulate counting, averaging and Krein estimates of xi side by side."""
    config = JobConfig(
        subcommand="compare-engines",
        inputs=_inputs(h0=h0, h1=h1),
        tol=tol,
        lam=lam,
        grid=grid,
        out=out,
        log_path=log_path,
    )
    sys.exit(run(config))


if __name__ == "__main__":
    main()
