"""Three independent spectral shift engines and residuals of their identities.

- counting: xi = N_{H0} - N_{H1}, exact integer step function
- averaging: xi(phi) = integral over r in [0, 1] of Tr(V phi(H0 + rV))
- krein: xi(lam) = arg det((H1 - z)(H0 - z)^-1) / pi at z = lam + i*eps
"""

import cmath
import logging
import math
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from src.models import (
    EngineChoice,
    HermitianOperator,
    KreinSchedule,
    PerturbationPath,
    SpectralShiftError,
    StepFunction,
    TestFunction,
)
from src.operators import (
    add,
    check_same_dim,
    counting_function,
    eigensystem,
    eigenvalues,
    is_zero,
    make_path,
    path_at,
    path_end,
    spectral_window,
    trace,
    apply_function,
    trace_norm,
)
from src.quadrature import integrate
from src.testfn import (
    evaluate,
    evaluate_array,
    make_test_function,
    pair_density,
    pair_derivative,
    step_combine,
    step_from_points,
    step_integral,
)

logger = logging.getLogger(__name__)

GUARD_FACTOR = 1e-6
KREIN_CONVERGENCE = 1e-3
MAX_UNWIND_STEPS = 2_000_000


class GuardViolation(SpectralShiftError):
    """Raised when a Krein grid point lies too close to an eigenvalue."""


class BranchAmbiguity(SpectralShiftError):
    """Raised when the determinant argument cannot be unwound or does not settle."""


# -- counting engine ----------------------------------------------------------


def ssf_counting(h0: HermitianOperator, h1: HermitianOperator) -> StepFunction:
    """xi(lam) = N_{H0}(lam) - N_{H1}(lam) as a canonical step function.

    Raises:
        DimensionMismatch: If the operators differ in dimension.
    """
    check_same_dim(h0, h1)
    points = np.concatenate([eigenvalues(h0), eigenvalues(h1)])
    return step_from_points(
        points, lambda lam: counting_function(h0, lam) - counting_function(h1, lam)
    )


def trace_difference(h0: HermitianOperator, h1: HermitianOperator, f: TestFunction) -> float:
    """Tr(phi(H1) - phi(H0))."""
    check_same_dim(h0, h1)
    return trace(apply_function(h1, f)) - trace(apply_function(h0, f))


# -- averaging engine ---------------------------------------------------------


def averaging_integrand(path: PerturbationPath, f: TestFunction, r: float) -> float:
    """Tr(V phi(H_r)) evaluated through the eigensystem of H_r."""
    es = eigensystem(path_at(path, r))
    u = es.eigenvectors
    weights = np.einsum("ij,ik,kj->j", u.conj(), path.v.entries, u).real
    return float(np.dot(evaluate_array(f, es.eigenvalues, 0), weights))


def ssf_averaging(path: PerturbationPath, f: TestFunction, tol: float) -> float:
    """xi(phi) by the spectral averaging formula, to absolute error ``tol``.

    Raises:
        QuadratureFailure: On node-budget exhaustion.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    check_same_dim(path.h0, path.v)
    if is_zero(path.v):
        return 0.0
    return integrate(lambda r: averaging_integrand(path, f, r), 0.0, 1.0, tol)


def ssf_averaging_at(path: PerturbationPath, lam: float, tol: float) -> float:
    """xi(lam) from the averaging engine.

    Pairs with a smooth bump supported inside the constancy interval of xi
    around ``lam`` and divides by the bump's mass. ``lam`` must not be an
    eigenvalue of either endpoint.
    """
    h1 = path_end(path)
    joint = np.sort(np.concatenate([eigenvalues(path.h0), eigenvalues(h1)]))
    _check_guard([lam], joint, spectral_window(path.h0, h1)[2])
    gap = float(np.min(np.abs(joint - lam)))
    half_width = 0.5 * gap
    bump = make_test_function("smooth-bump", lam - half_width, lam + half_width)
    mass = half_width * _unit_bump_mass()
    return ssf_averaging(path, bump, tol * mass) / mass


# -- Krein determinant engine -------------------------------------------------


def krein_schedule(
    grid: Sequence[float],
    epsilon_start: float = None,
    epsilon_min: float = None,
    refinement_factor: float = 0.1,
    scale: float = 1.0,
) -> KreinSchedule:
    """Schedule with epsilons relative to ``scale`` (typically the spectral diameter)."""
    start = epsilon_start if epsilon_start is not None else 1e-2 * scale
    stop = epsilon_min if epsilon_min is not None else 1e-13 * scale
    return KreinSchedule(
        lambda_grid=tuple(sorted(float(x) for x in grid)),
        epsilon_start=start,
        epsilon_min=stop,
        refinement_factor=refinement_factor,
    )


def ssf_krein(path: PerturbationPath, sched: KreinSchedule) -> List[Tuple[float, float]]:
    """Estimate xi on ``sched.lambda_grid`` from the perturbation determinant.

    For each epsilon the argument of det(H1 - z) / det(H0 - z) along
    z = lam + i*eps is continued from an anchor below the joint spectrum
    (where xi vanishes) with every increment kept inside (-pi/2, pi/2).
    Epsilon starts at the smaller of ``epsilon_start`` and a tenth of the
    closest grid-to-eigenvalue distance, then shrinks by ``refinement_factor``
    until two successive estimates agree within 1e-3 at every grid point.

    Raises:
        GuardViolation: If a grid point is within 1e-6 * (spectral diameter)
            of an eigenvalue of H0 or H1.
        BranchAmbiguity: If unwinding fails or no convergence by epsilon_min.
    """
    _check_schedule(sched)
    h0 = path.h0
    h1 = path_end(path)
    if not sched.lambda_grid:
        return []
    low, _, diameter = spectral_window(h0, h1)
    joint = np.sort(np.concatenate([eigenvalues(h0), eigenvalues(h1)]))
    _check_guard(sched.lambda_grid, joint, diameter)

    anchor = low - trace_norm(path.v) - diameter
    previous = None
    # start below every grid-to-eigenvalue distance
    nearest = min(float(np.min(np.abs(joint - lam))) for lam in sched.lambda_grid)
    eps = min(sched.epsilon_start, max(0.1 * nearest, sched.epsilon_min))
    while True:
        current = _unwound_estimates(h0, h1, anchor, sched.lambda_grid, eps, joint)
        logger.debug("krein eps=%.3e estimates=%s", eps, current)
        if previous is not None:
            change = max(abs(c - p) for c, p in zip(current, previous))
            if change < KREIN_CONVERGENCE:
                return list(zip(sched.lambda_grid, current))
        previous = current
        next_eps = eps * sched.refinement_factor
        if next_eps < sched.epsilon_min:
            raise BranchAmbiguity(
                f"krein estimates did not settle before epsilon_min={sched.epsilon_min:g}"
            )
        eps = next_eps


def ssf_krein_step(h0: HermitianOperator, h1: HermitianOperator, sched: KreinSchedule = None) -> StepFunction:
    """Krein estimates at the midpoints of the joint eigenvalue partition, rounded.

    Raises:
        BranchAmbiguity: If an estimate lies 0.25 or further from an integer.
    """
    check_same_dim(h0, h1)
    joint = sorted(set(np.concatenate([eigenvalues(h0), eigenvalues(h1)]).tolist()))
    mids = [0.5 * (lo + hi) for lo, hi in zip(joint, joint[1:])]
    if not mids:
        return StepFunction()
    diameter = spectral_window(h0, h1)[2]
    if sched is None:
        sched = krein_schedule(mids, scale=diameter)
    else:
        sched = KreinSchedule(tuple(mids), sched.epsilon_start, sched.epsilon_min, sched.refinement_factor)
    rounded = {}
    for lam, estimate in ssf_krein(make_path(h0, h1), sched):
        nearest = round(estimate)
        if abs(estimate - nearest) >= 0.25:
            raise BranchAmbiguity(f"krein estimate {estimate:.6f} at lambda={lam!r} is not near an integer")
        rounded[lam] = int(nearest)
    values = [rounded[m] for m in mids]
    return step_from_points(joint, lambda lam: values[joint.index(lam)])


# -- identity residuals -------------------------------------------------------


def additivity_residual(
    h0: HermitianOperator,
    v1: HermitianOperator,
    v2: HermitianOperator,
    f: TestFunction,
    engine: EngineChoice,
    tol: float = 1e-8,
) -> float:
    """|xi_{H2,H0}(phi) - xi_{H2,H1}(phi) - xi_{H1,H0}(phi)| with H_k = H0 + V_k.

    Step-function engines combine the three densities with exact integer
    arithmetic before pairing; the averaging engine runs three quadratures.
    """
    engine = EngineChoice(engine)
    check_same_dim(h0, v1, v2)
    h1 = add(h0, v1)
    h2 = add(h0, v2)
    if engine is EngineChoice.AVERAGING:
        if tol <= 0:
            raise ValueError(f"tol must be positive, got {tol}")
        total = ssf_averaging(make_path(h0, h2), f, tol)
        first = ssf_averaging(make_path(h1, h2), f, tol)
        second = ssf_averaging(make_path(h0, h1), f, tol)
        return abs(total - first - second)

    density = ssf_counting if engine is EngineChoice.COUNTING else ssf_krein_step
    combined = step_combine(
        [(1, density(h0, h2)), (-1, density(h1, h2)), (-1, density(h0, h1))]
    )
    return abs(pair_density(combined, f, tol))


def mass_residual(h0: HermitianOperator, h1: HermitianOperator) -> float:
    """|integral of xi - Tr(H1 - H0)|."""
    return abs(step_integral(ssf_counting(h0, h1)) - (trace(h1) - trace(h0)))


def trace_formula_residual(h0: HermitianOperator, h1: HermitianOperator, f: TestFunction) -> float:
    return abs(trace_difference(h0, h1, f) - pair_derivative(ssf_counting(h0, h1), f))


# -- internal helpers ---------------------------------------------------------


@lru_cache(maxsize=None)
def _unit_bump_mass() -> float:
    unit = make_test_function("smooth-bump", -1.0, 1.0)
    return integrate(lambda s: evaluate(unit, s, 0), -1.0, 1.0, 1e-14)


def _check_schedule(sched: KreinSchedule) -> None:
    if not 0 < sched.epsilon_min <= sched.epsilon_start:
        raise ValueError("krein schedule needs 0 < epsilon_min <= epsilon_start")
    if not 0 < sched.refinement_factor < 1:
        raise ValueError("krein refinement_factor must lie in (0, 1)")
    if any(lo >= hi for lo, hi in zip(sched.lambda_grid, sched.lambda_grid[1:])):
        raise ValueError("krein lambda_grid must be strictly ascending")


def _check_guard(grid: Sequence[float], joint: np.ndarray, diameter: float) -> None:
    guard = GUARD_FACTOR * diameter
    for lam in grid:
        distance = float(np.min(np.abs(joint - lam)))
        if distance < guard:
            raise GuardViolation(
                f"lambda={lam!r} lies {distance:.3e} from an eigenvalue (guard {guard:.3e})"
            )


def _phase(h0: HermitianOperator, h1: HermitianOperator, z: complex) -> complex:
    """Unit-modulus phase of det(H1 - z) / det(H0 - z)."""
    n = h0.dim
    shift = z * np.eye(n)
    sign1, _ = np.linalg.slogdet(h1.entries - shift)
    sign0, _ = np.linalg.slogdet(h0.entries - shift)
    return complex(sign1) / complex(sign0)


def _unwound_estimates(
    h0: HermitianOperator,
    h1: HermitianOperator,
    anchor: float,
    grid: Sequence[float],
    eps: float,
    joint: np.ndarray,
) -> List[float]:
    """Continue the argument from ``anchor`` through the ascending grid at height eps.

    Steps never exceed half the distance to the nearest eigenvalue (or eps/4
    once within eps of it), so no full turn can hide inside one step.
    """
    min_step = 1e-3 * eps
    lam = anchor
    phase = _phase(h0, h1, complex(lam, eps))
    angle = cmath.phase(phase)
    estimates = []
    steps = 0
    for target in grid:
        while lam < target:
            distance = float(np.min(np.abs(joint - lam)))
            step = max(0.25 * eps, 0.5 * distance)
            while True:
                trial = min(lam + step, target)
                trial_phase = _phase(h0, h1, complex(trial, eps))
                increment = cmath.phase(trial_phase / phase)
                if abs(increment) < math.pi / 2:
                    break
                step *= 0.5
                if step < min_step:
                    raise BranchAmbiguity(
                        f"argument increment bound unattainable near lambda={lam!r} at eps={eps:g}"
                    )
            angle += increment
            lam, phase = trial, trial_phase
            steps += 1
            if steps > MAX_UNWIND_STEPS:
                raise BranchAmbiguity(f"argument continuation exceeded {MAX_UNWIND_STEPS} steps")
        estimates.append(angle / math.pi)
    return estimates
