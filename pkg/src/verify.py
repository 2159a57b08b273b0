"""Built-in verification suite: seeded cases, residual checks, pass/fail report."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.decomposition import (
    continuity_split,
    flatten,
    labeled_add,
    labeled_scale,
    part_additivity_residual,
    reference_continuity_table,
    ssf_part,
    weak_continuity_table,
)
from src.engines import (
    additivity_residual,
    krein_schedule,
    mass_residual,
    ssf_averaging,
    ssf_counting,
    ssf_krein,
    trace_formula_residual,
)
from src.flow import spectral_flow
from src.generator import (
    SMOOTH_FAMILIES,
    case_rng,
    random_hermitian,
    random_labeled,
    random_test_function,
    random_unitary,
    regular_levels,
)
from src.models import (
    CheckResult,
    ContinuityRow,
    EngineChoice,
    LabeledOperator,
    LabeledPath,
    PartLabel,
    SpectralShiftError,
)
from src.operators import (
    add,
    conjugate,
    eigenvalues,
    hermitian,
    make_path,
    spectral_window,
    subtract,
    trace_norm,
)
from src.testfn import pair_density, step_abs_integral, step_add, step_shift, step_value, sup_norm

logger = logging.getLogger(__name__)

AVERAGING_AGREEMENT = 1e-6
TRACE_FORMULA_BOUND = 1e-10
MASS_BOUND = 1e-10
KREIN_AGREEMENT = 1e-3
COVARIANCE_BOUND = 1e-10
CONTINUITY_LIMIT_BOUND = 1e-6

CaseFn = Callable[[int, int, float], Dict[str, float]]


@dataclass(frozen=True)
class Suite:
    name: str
    cases: int
    run_case: CaseFn
    # (check name, engine, bound as a function of tol)
    checks: Tuple[Tuple[str, str, Callable[[float], float]], ...]


# -- case functions -----------------------------------------------------------


def _pairs_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    dim = int(rng.integers(1, 9))
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim)
    trace_res = max(
        trace_formula_residual(h0, h1, random_test_function(rng, h0, h1, family=family))
        for family in SMOOTH_FAMILIES
    )

    xi = ssf_counting(h0, h1)
    antisym = step_abs_integral(step_add(xi, ssf_counting(h1, h0)))

    u = random_unitary(rng, dim)
    rotated = ssf_counting(conjugate(h0, u), conjugate(h1, u))
    shift = float(rng.uniform(-2.0, 2.0))
    shifted = ssf_counting(
        add(h0, hermitian(shift * np.eye(dim))), add(h1, hermitian(shift * np.eye(dim)))
    )
    return {
        "trace-formula": trace_res,
        "mass-identity": mass_residual(h0, h1),
        "antisymmetry": antisym,
        "unitary-invariance": _step_distance(rotated, xi),
        "shift-covariance": _step_distance(shifted, step_shift(xi, shift)),
    }


def _paths_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    dim = int(rng.integers(1, 7))
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim)
    path = make_path(h0, h1)
    f = random_test_function(rng, h0, h1)
    averaged = ssf_averaging(path, f, tol)
    counted = pair_density(ssf_counting(h0, h1), f, tol)
    return {
        "averaging-formula": abs(averaged - counted),
        "averaging-bound": max(0.0, abs(averaged) - trace_norm(path.v) * sup_norm(f)),
    }


def _triples_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    dim = int(rng.integers(1, 6))
    h0 = random_hermitian(rng, dim)
    v1 = random_hermitian(rng, dim)
    v2 = random_hermitian(rng, dim)
    f = random_test_function(rng, h0, add(h0, v1), add(h0, v2))
    return {
        "additivity-counting": additivity_residual(h0, v1, v2, f, EngineChoice.COUNTING, tol),
        "additivity-averaging": additivity_residual(h0, v1, v2, f, EngineChoice.AVERAGING, tol),
    }


def _labeled_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    h0 = random_labeled(rng)
    v1 = random_labeled(rng)
    v2 = random_labeled(rng)
    path = LabeledPath(h0, v2)
    flat = flatten(path)
    f = random_test_function(rng, flat.h0, add(flat.h0, flat.v))

    ac = ssf_part(path, PartLabel.AC, f, tol)
    sing = ssf_part(path, PartLabel.SING, f, tol)
    total = ssf_averaging(flat, f, tol)
    reversed_path = LabeledPath(labeled_add(h0, v2), labeled_scale(v2, -1.0))
    reversed_ac = ssf_part(reversed_path, PartLabel.AC, f, tol)
    reversed_sing = ssf_part(reversed_path, PartLabel.SING, f, tol)
    ac_only = LabeledPath(h0, _zero_label(v2, PartLabel.SING))
    sing_only = LabeledPath(h0, _zero_label(v2, PartLabel.AC))
    return {
        "part-additivity-ac": part_additivity_residual(h0, v1, v2, PartLabel.AC, f, tol),
        "part-additivity-sing": part_additivity_residual(h0, v1, v2, PartLabel.SING, f, tol),
        "decomposition-identity": abs(ac + sing - total),
        "part-antisymmetry-ac": abs(ac + reversed_ac),
        "part-antisymmetry-sing": abs(sing + reversed_sing),
        "label-locality-ac": abs(ssf_part(sing_only, PartLabel.AC, f, tol)),
        "label-locality-sing": abs(ssf_part(ac_only, PartLabel.SING, f, tol)),
    }


def _continuity_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    h0 = random_labeled(rng)
    v = random_labeled(rng)
    w = random_labeled(rng)
    flat = flatten(LabeledPath(h0, v))
    f = random_test_function(rng, flat.h0, add(flat.h0, flat.v))
    phi_sup = sup_norm(f)

    scaled = [labeled_scale(v, 1.0 - 1.0 / n) for n in range(2, 11)]
    rows = weak_continuity_table(h0, v, scaled, f, tol)

    converging = [labeled_add(v, labeled_scale(w, 8.0 ** -n)) for n in range(1, 11)]
    converging_rows = weak_continuity_table(h0, v, converging, f, tol)
    approaching_w = [labeled_add(w, labeled_scale(v, 8.0 ** -n)) for n in range(1, 11)]
    reference_rows = reference_continuity_table(h0, v, w, approaching_w, f, tol)
    limit_rows = converging_rows + reference_rows

    split = continuity_split(h0, v, scaled[0], f, float(rng.random()))
    split_res = max(
        abs(split.perturbation_term + split.resolvent_term - split.integrand_gap),
        max(0.0, abs(split.perturbation_term) - split.perturbation_bound),
    )
    return {
        "weak-continuity-bound": max(
            0.0, max(row.ssf_gap - 2.0 * row.trace_norm_gap * phi_sup for row in rows + limit_rows)
        ),
        "weak-continuity-limit": max(converging_rows[-1].ssf_gap, reference_rows[-1].ssf_gap),
        "weak-continuity-monotone": max(
            _envelope_growth(converging_rows, phi_sup), _envelope_growth(reference_rows, phi_sup)
        ),
        "continuity-split": split_res,
    }


def _flow_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    dim = int(rng.integers(1, 7))
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim)
    path = make_path(h0, h1)
    half = hermitian(h0.entries + 0.5 * path.v.entries)
    first = make_path(h0, half)
    second = make_path(half, hermitian(half.entries + 0.5 * path.v.entries))
    xi = ssf_counting(h0, h1)

    mismatches = 0
    split_mismatches = 0
    for lam in regular_levels(rng, 5, h0, h1, half):
        flow = spectral_flow(path, lam)
        mismatches += int(flow != step_value(xi, lam))
        split_mismatches += int(spectral_flow(first, lam) + spectral_flow(second, lam) != flow)
    return {"flow-identity": float(mismatches), "flow-path-additivity": float(split_mismatches)}


def _krein_case(seed: int, index: int, tol: float) -> Dict[str, float]:
    rng = case_rng(seed, index)
    dim = int(rng.integers(1, 5))
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim)
    path = make_path(h0, h1)
    end = add(h0, path.v)
    joint = sorted(set(np.concatenate([eigenvalues(h0), eigenvalues(end)]).tolist()))
    low, high, diameter = spectral_window(h0, end)
    grid = [low - 0.5 * diameter] + [0.5 * (a + b) for a, b in zip(joint, joint[1:])] + [high + 0.5 * diameter]
    xi = ssf_counting(h0, end)
    estimates = ssf_krein(path, krein_schedule(grid, scale=diameter))
    return {"krein-engine": max(abs(value - step_value(xi, lam)) for lam, value in estimates)}


SUITES: Tuple[Suite, ...] = (
    Suite("pairs", 200, _pairs_case, (
        ("trace-formula", "counting", lambda tol: TRACE_FORMULA_BOUND),
        ("mass-identity", "counting", lambda tol: MASS_BOUND),
        ("antisymmetry", "counting", lambda tol: 0.0),
        ("unitary-invariance", "counting", lambda tol: COVARIANCE_BOUND),
        ("shift-covariance", "counting", lambda tol: COVARIANCE_BOUND),
    )),
    Suite("paths", 100, _paths_case, (
        ("averaging-formula", "averaging", lambda tol: AVERAGING_AGREEMENT + 2 * tol),
        ("averaging-bound", "averaging", lambda tol: tol),
    )),
    Suite("triples", 100, _triples_case, (
        ("additivity-counting", "counting", lambda tol: 0.0),
        ("additivity-averaging", "averaging", lambda tol: 3 * tol),
    )),
    Suite("labeled", 50, _labeled_case, (
        ("part-additivity-ac", "averaging", lambda tol: 3 * tol),
        ("part-additivity-sing", "averaging", lambda tol: 3 * tol),
        ("decomposition-identity", "averaging", lambda tol: 2 * tol),
        ("part-antisymmetry-ac", "averaging", lambda tol: 2 * tol),
        ("part-antisymmetry-sing", "averaging", lambda tol: 2 * tol),
        ("label-locality-ac", "averaging", lambda tol: tol),
        ("label-locality-sing", "averaging", lambda tol: tol),
    )),
    Suite("continuity", 20, _continuity_case, (
        ("weak-continuity-bound", "averaging", lambda tol: 2 * tol),
        ("weak-continuity-limit", "averaging", lambda tol: CONTINUITY_LIMIT_BOUND),
        ("weak-continuity-monotone", "averaging", lambda tol: 2 * tol),
        ("continuity-split", "averaging", lambda tol: TRACE_FORMULA_BOUND),
    )),
    Suite("flow", 100, _flow_case, (
        ("flow-identity", "counting", lambda tol: 0.0),
        ("flow-path-additivity", "counting", lambda tol: 0.0),
    )),
    Suite("krein", 30, _krein_case, (
        ("krein-engine", "krein", lambda tol: KREIN_AGREEMENT),
    )),
)


def run_suite(
    seed: int,
    tol: float,
    cases: Optional[int] = None,
    threads: int = 1,
    suites: Sequence[Suite] = SUITES,
) -> List[CheckResult]:
    """Run every suite and return one CheckResult per check (max residual over cases).

    Cases fan out over ``threads`` workers; results merge in case order, so
    the report is identical for any thread count.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    results: List[CheckResult] = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for suite in suites:
            count = suite.cases if cases is None else min(cases, suite.cases)
            outcomes = list(pool.map(lambda i, s=suite: _guarded(s, seed, i, tol), range(count)))
            for check, engine, bound in suite.checks:
                residual = max((o[check] for o in outcomes), default=0.0)
                result = CheckResult(check=check, engine=engine, residual=residual, bound=bound(tol))
                logger.info(
                    "%s/%s: residual %.3e bound %.3e %s",
                    suite.name, check, residual, result.bound, "pass" if result.passed else "FAIL",
                )
                results.append(result)
    return results


def summarize(results: Sequence[CheckResult]) -> str:
    """Short narrative: overall status and the failing checks."""
    failed = [r for r in results if not r.passed]
    if not failed:
        return f"All {len(results)} checks passed."
    lines = [f"VERIFICATION FAILED: {len(failed)} of {len(results)} check(s) exceeded their bound."]
    for r in failed:
        lines.append(f"  - {r.check} ({r.engine}): residual {r.residual:.3e} > bound {r.bound:.3e}")
    return "\n".join(lines)


# -- internal helpers ---------------------------------------------------------


def _guarded(suite: Suite, seed: int, index: int, tol: float) -> Dict[str, float]:
    try:
        return suite.run_case(seed, index, tol)
    except SpectralShiftError as exc:
        logger.warning("%s case %d failed: %s: %s", suite.name, index, type(exc).__name__, exc)
        return {check: math.inf for check, _, _ in suite.checks}


def _step_distance(a, b) -> float:
    """Largest breakpoint displacement when the integer values agree, else inf."""
    if a.values != b.values or len(a.breakpoints) != len(b.breakpoints):
        return math.inf
    if not a.breakpoints:
        return 0.0
    return float(np.max(np.abs(np.subtract(a.breakpoints, b.breakpoints))))


def _zero_label(v: LabeledOperator, label: PartLabel) -> LabeledOperator:
    """Copy of ``v`` with the blocks carrying ``label`` replaced by zero."""
    return LabeledOperator(blocks=tuple(
        (subtract(op, op) if lab is label else op, lab) for op, lab in v.blocks
    ))


def _envelope_growth(rows: Sequence[ContinuityRow], phi_sup: float) -> float:
    """How far a row's ssf gap or trace-norm gap rises above the previous row's."""
    growth = 0.0
    for before, after in zip(rows, rows[1:]):
        growth = max(
            growth,
            after.ssf_gap - 2.0 * before.trace_norm_gap * phi_sup,
            after.trace_norm_gap - before.trace_norm_gap,
        )
    return growth
