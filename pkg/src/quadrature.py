"""Adaptive Gauss-Legendre quadrature with recursive bisection."""

import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.models import SpectralShiftError

logger = logging.getLogger(__name__)

GAUSS_ORDER = 15
NODE_BUDGET = 400_000
MIN_WIDTH_FACTOR = 1e-13


class QuadratureFailure(SpectralShiftError):
    """Raised when the tolerance is not reached within the node budget."""


@lru_cache(maxsize=8)
def _rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(f: Callable[[float], float], a: float, b: float, order: int = GAUSS_ORDER) -> float:
    """Fixed-order Gauss-Legendre rule on [a, b] for a scalar integrand."""
    nodes, weights = _rule(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    total = 0.0
    for x, w in zip(nodes, weights):
        total += w * f(mid + half * x)
    return half * total


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    node_budget: int = NODE_BUDGET,
) -> float:
    """Integrate ``f`` over [a, b] to absolute error ``tol``.

    Each interval is compared against the sum of its two halves; an interval
    is accepted when they agree within its share of the tolerance (halved at
    every bisection). Intervals are processed depth-first, left before right,
    so the summation order is fixed for a given integrand.

    Raises:
        QuadratureFailure: If the node budget is exhausted or an interval
            shrinks below resolution without meeting its tolerance.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol, node_budget)

    min_width = MIN_WIDTH_FACTOR * max(1.0, abs(a), abs(b))
    evaluations = GAUSS_ORDER
    whole = gauss_legendre(f, a, b)
    stack = [(a, b, whole, tol)]
    total = 0.0
    accepted = 0

    while stack:
        lo, hi, estimate, local_tol = stack.pop()
        mid = 0.5 * (lo + hi)
        left = gauss_legendre(f, lo, mid)
        right = gauss_legendre(f, mid, hi)
        evaluations += 2 * GAUSS_ORDER
        refined = left + right
        if abs(refined - estimate) <= local_tol:
            total += refined
            accepted += 1
            continue
        if evaluations > node_budget:
            raise QuadratureFailure(
                f"node budget {node_budget} exhausted on [{a}, {b}] at tol={tol:g}"
            )
        if hi - lo < min_width:
            raise QuadratureFailure(
                f"interval [{lo!r}, {hi!r}] below resolution without reaching tol={tol:g}"
            )
        # right pushed first so the left half is popped (and summed) first
        stack.append((mid, hi, right, local_tol / 2))
        stack.append((lo, mid, left, local_tol / 2))

    logger.debug(
        "integrated [%g, %g]: %d intervals, %d evaluations", a, b, accepted, evaluations
    )
    return total
