"""Eigenvalue tracking along H_r = H0 + rV and signed crossings through a level.

Curves are the sorted eigenvalues of H_r, which are continuous in r. Analytic
branches through exact degeneracies are not separated; the signed count
through a regular level only depends on the endpoint counting functions.
"""

import logging
import math
from typing import List

import numpy as np

from src.models import CrossingEvent, EigenPath, PerturbationPath, SpectralShiftError
from src.operators import check_same_dim, eigenvalues, operator_norm, path_at, path_end, spectral_window

logger = logging.getLogger(__name__)

LIPSCHITZ_FACTOR = 1.01
R_RESOLUTION = 1e-10
MIN_SLOPE = 1e-12
ENDPOINT_FACTOR = 1e-9


class EndpointDegeneracy(SpectralShiftError):
    """Raised when the level is too close to an eigenvalue of H0 or H1."""


class CrossingUnresolved(SpectralShiftError):
    """Raised when a crossing direction cannot be decided at r-resolution 1e-10."""


def track_eigenvalues(path: PerturbationPath, max_step: float) -> EigenPath:
    """Sample the sorted eigenvalue curves on [0, 1].

    Starts from a uniform grid with spacing at most ``max_step`` and bisects
    every interval whose largest per-index jump exceeds
    ``1.01 * ||V||_op * dr`` (plus rounding slack).
    """
    if max_step <= 0:
        raise ValueError(f"max_step must be positive, got {max_step}")
    check_same_dim(path.h0, path.v)
    count = max(1, math.ceil(1.0 / max_step))
    params = [k / count for k in range(count + 1)]
    samples = {r: eigenvalues(path_at(path, r)) for r in params}
    norm_v = operator_norm(path.v)
    scale = max(1.0, float(np.max(np.abs(samples[0.0]))) + norm_v)

    refining = True
    while refining:
        refining = False
        refined = [params[0]]
        for lo, hi in zip(params, params[1:]):
            jump = float(np.max(np.abs(samples[hi] - samples[lo])))
            allowed = LIPSCHITZ_FACTOR * norm_v * (hi - lo) + 1e-12 * scale
            if jump > allowed and hi - lo > 1e-12:
                mid = 0.5 * (lo + hi)
                samples[mid] = eigenvalues(path_at(path, mid))
                refined.append(mid)
                refining = True
            refined.append(hi)
        params = refined

    logger.debug("tracked %d samples along the path", len(params))
    return EigenPath(parameters=tuple(params), curves=np.array([samples[r] for r in params]))


def crossings(path: PerturbationPath, lam: float, max_step: float) -> List[CrossingEvent]:
    """Crossing events of the sorted eigenvalue curves through ``lam``.

    Raises:
        EndpointDegeneracy: If ``lam`` is within 1e-9 * (spectral diameter)
            of an eigenvalue of H0 or H1.
        CrossingUnresolved: If a bracketed crossing has no decidable direction.
    """
    _check_endpoints(path, lam)
    tracked = track_eigenvalues(path, max_step)
    params = tracked.parameters
    below = tracked.curves <= lam
    events = []
    for k in range(len(params) - 1):
        for i in np.flatnonzero(below[k] != below[k + 1]):
            events.append(_refine(path, lam, int(i), params[k], params[k + 1], bool(below[k, i])))
    return events


def spectral_flow(path: PerturbationPath, lam: float, max_step: float = 0.05) -> int:
    """Signed number of eigenvalue crossings through ``lam`` along the path."""
    return sum(event.direction for event in crossings(path, lam, max_step))


# -- internal helpers ---------------------------------------------------------


def _check_endpoints(path: PerturbationPath, lam: float) -> None:
    h1 = path_end(path)
    diameter = spectral_window(path.h0, h1)[2]
    joint = np.concatenate([eigenvalues(path.h0), eigenvalues(h1)])
    distance = float(np.min(np.abs(joint - lam)))
    if distance <= ENDPOINT_FACTOR * diameter:
        raise EndpointDegeneracy(
            f"level {lam!r} lies {distance:.3e} from an endpoint eigenvalue"
        )


def _refine(path: PerturbationPath, lam: float, index: int, lo: float, hi: float, below_lo: bool) -> CrossingEvent:
    """Bisect a bracketed crossing down to R_RESOLUTION and read off its direction."""
    value_lo = float(eigenvalues(path_at(path, lo))[index])
    value_hi = float(eigenvalues(path_at(path, hi))[index])
    while hi - lo > R_RESOLUTION:
        mid = 0.5 * (lo + hi)
        value = float(eigenvalues(path_at(path, mid))[index])
        if (value <= lam) == below_lo:
            lo, value_lo = mid, value
        else:
            hi, value_hi = mid, value
    slope = (value_hi - value_lo) / (hi - lo)
    if abs(slope) < MIN_SLOPE:
        raise CrossingUnresolved(
            f"crossing of curve {index} through {lam!r} near r={lo!r} has slope {slope:.3e}"
        )
    return CrossingEvent(r_star=0.5 * (lo + hi), curve_index=index, direction=1 if slope > 0 else -1)
