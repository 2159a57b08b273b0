"""Compactly supported test functions, integer step densities, and their pairings."""

import math
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.models import StepFunction, TestFunction
from src.quadrature import integrate


FAMILIES = ("smooth-bump", "raised-cosine", "cubic-spline-hat", "plateau-bump")

# sup of the unit-amplitude profile
PEAK_CONSTANTS: Dict[str, float] = {
    "smooth-bump": math.exp(-1.0),
    "raised-cosine": 1.0,
    "cubic-spline-hat": 1.0,
    "plateau-bump": 1.0,
}


def make_test_function(
    family: str,
    a: float,
    b: float,
    amplitude: float = 1.0,
    plateau: Tuple[float, float] = None,
) -> TestFunction:
    """Validate and build a TestFunction.

    Raises:
        ValueError: On an unknown family, an empty support, or a plateau
            that does not sit strictly inside the support.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown test-function family {family!r} (expected one of {', '.join(FAMILIES)})")
    if not a < b:
        raise ValueError(f"support must satisfy a < b, got [{a}, {b}]")
    if family == "plateau-bump":
        if plateau is None:
            raise ValueError("plateau-bump requires a plateau interval (c, d)")
        c, d = plateau
        if not a < c <= d < b:
            raise ValueError(f"plateau [{c}, {d}] must satisfy a < c <= d < b")
        plateau = (float(c), float(d))
    elif plateau is not None:
        raise ValueError(f"family {family!r} takes no plateau interval")
    return TestFunction(family=family, support=(float(a), float(b)), amplitude=float(amplitude), plateau=plateau)


def parse_test_function(text: str) -> TestFunction:
    """Parse ``family:a:b:amplitude`` or ``plateau:a:b:amplitude:c:d``."""
    parts = text.split(":")
    family = parts[0]
    if family == "plateau":
        family = "plateau-bump"
    try:
        numbers = [float(p) for p in parts[1:]]
    except ValueError as exc:
        raise ValueError(f"invalid test function {text!r}: {exc}") from exc
    if family == "plateau-bump":
        if len(numbers) != 5:
            raise ValueError(f"invalid test function {text!r}: expected plateau:a:b:amplitude:c:d")
        a, b, amp, c, d = numbers
        return make_test_function(family, a, b, amp, (c, d))
    if len(numbers) != 3:
        raise ValueError(f"invalid test function {text!r}: expected family:a:b:amplitude")
    a, b, amp = numbers
    return make_test_function(family, a, b, amp)


def format_test_function(f: TestFunction) -> str:
    a, b = f.support
    if f.family == "plateau-bump":
        c, d = f.plateau
        return f"plateau:{a!r}:{b!r}:{f.amplitude!r}:{c!r}:{d!r}"
    return f"{f.family}:{a!r}:{b!r}:{f.amplitude!r}"


def sup_norm(f: TestFunction) -> float:
    return abs(f.amplitude) * PEAK_CONSTANTS[f.family]


def evaluate(f: TestFunction, x: float, order: int = 0) -> float:
    """phi(x) for order 0, phi'(x) for order 1."""
    return float(evaluate_array(f, np.asarray([x], dtype=float), order)[0])


def evaluate_array(f: TestFunction, x: np.ndarray, order: int = 0) -> np.ndarray:
    """Vectorized ``evaluate``; exactly zero outside the open support."""
    if order not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {order}")
    x = np.asarray(x, dtype=float)
    a, b = f.support
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)

    if f.family == "plateau-bump":
        if np.any(inside):
            out[inside] = _plateau(f, x[inside], order)
        return out

    half = 0.5 * (b - a)
    t = (x - 0.5 * (a + b)) / half
    # t can round onto +-1 at the last floats inside the support
    inside &= np.abs(t) < 1.0
    if not np.any(inside):
        return out
    if order == 0:
        out[inside] = f.amplitude * _PROFILES[f.family](t[inside])
    else:
        out[inside] = f.amplitude * _SLOPES[f.family](t[inside]) / half
    return out


# -- step functions -----------------------------------------------------------


def make_step(breakpoints: Sequence[float], values: Sequence[int]) -> StepFunction:
    """Canonicalize: merge equal neighbours and trim zero ends.

    ``values[k]`` is the value on ``[breakpoints[k], breakpoints[k + 1])``,
    so ``len(values) == len(breakpoints) - 1`` (or both empty).
    """
    bps = [float(b) for b in breakpoints]
    vals = [int(v) for v in values]
    if not bps and not vals:
        return StepFunction()
    if len(vals) != len(bps) - 1:
        raise ValueError(f"expected {len(bps) - 1} values for {len(bps)} breakpoints, got {len(vals)}")
    if any(lo >= hi for lo, hi in zip(bps, bps[1:])):
        raise ValueError("breakpoints must be strictly ascending")

    merged_b: List[float] = [bps[0]]
    merged_v: List[int] = []
    for k, v in enumerate(vals):
        if merged_v and merged_v[-1] == v:
            merged_b[-1] = bps[k + 1]
        else:
            merged_v.append(v)
            merged_b.append(bps[k + 1])

    while merged_v and merged_v[0] == 0:
        merged_v.pop(0)
        merged_b.pop(0)
    while merged_v and merged_v[-1] == 0:
        merged_v.pop()
        merged_b.pop()
    if not merged_v:
        return StepFunction()
    return StepFunction(breakpoints=tuple(merged_b), values=tuple(merged_v))


def step_from_points(points: Iterable[float], value_at) -> StepFunction:
    """Build a step function whose value on each right-open piece is ``value_at(left_end)``."""
    bps = sorted(set(float(p) for p in points))
    return make_step(bps, [value_at(lo) for lo in bps[:-1]])


def step_value(xi: StepFunction, lam: float) -> int:
    if not xi.values:
        return 0
    k = int(np.searchsorted(xi.breakpoints, lam, side="right")) - 1
    if k < 0 or k >= len(xi.values):
        return 0
    return xi.values[k]


def step_combine(terms: Sequence[Tuple[int, StepFunction]]) -> StepFunction:
    """Exact integer linear combination ``sum c_i * xi_i``."""
    points = set()
    for _, xi in terms:
        points.update(xi.breakpoints)
    return step_from_points(points, lambda lam: sum(c * step_value(xi, lam) for c, xi in terms))


def step_add(a: StepFunction, b: StepFunction) -> StepFunction:
    return step_combine([(1, a), (1, b)])


def step_negate(xi: StepFunction) -> StepFunction:
    return StepFunction(breakpoints=xi.breakpoints, values=tuple(-v for v in xi.values))


def step_shift(xi: StepFunction, c: float) -> StepFunction:
    return make_step([b + c for b in xi.breakpoints], xi.values)


def step_integral(xi: StepFunction) -> float:
    """Integral of xi over the real line (math.fsum for a correctly rounded sum)."""
    return math.fsum(v * (hi - lo) for v, lo, hi in _pieces(xi))


def step_abs_integral(xi: StepFunction) -> float:
    return math.fsum(abs(v) * (hi - lo) for v, lo, hi in _pieces(xi))


# -- pairings -----------------------------------------------------------------


def pair_density(xi: StepFunction, f: TestFunction, tol: float) -> float:
    """xi(phi) = integral of xi * phi, adaptive Gauss-Legendre per step piece.

    The tolerance is split evenly across the pieces meeting the support of phi.

    Raises:
        QuadratureFailure: If a piece does not converge within the node budget.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    a, b = f.support
    pieces = [(v, max(lo, a), min(hi, b)) for v, lo, hi in _pieces(xi) if v != 0 and lo < b and hi > a]
    if not pieces:
        return 0.0
    share = tol / len(pieces)
    total = 0.0
    for v, lo, hi in pieces:
        total += v * integrate(lambda x: evaluate(f, x, 0), lo, hi, share / abs(v))
    return total


def pair_derivative(xi: StepFunction, f: TestFunction, tol: float = 1e-12) -> float:
    """Integral of xi * phi', by the telescoping closed form (``tol`` is unused)."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return math.fsum(v * (evaluate(f, hi, 0) - evaluate(f, lo, 0)) for v, lo, hi in _pieces(xi))


# -- family profiles ----------------------------------------------------------


def _pieces(xi: StepFunction) -> List[Tuple[int, float, float]]:
    bps = xi.breakpoints
    return [(v, bps[k], bps[k + 1]) for k, v in enumerate(xi.values)]


def _bump(t: np.ndarray) -> np.ndarray:
    return np.exp(-1.0 / (1.0 - t * t))


def _bump_slope(t: np.ndarray) -> np.ndarray:
    s = 1.0 - t * t
    return _bump(t) * (-2.0 * t / (s * s))


def _cosine(t: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.cos(np.pi * t))


def _cosine_slope(t: np.ndarray) -> np.ndarray:
    return -0.5 * np.pi * np.sin(np.pi * t)


def _spline(t: np.ndarray) -> np.ndarray:
    u = np.abs(t)
    return np.where(u <= 0.5, 1.0 - 6.0 * u ** 2 + 6.0 * u ** 3, 2.0 * (1.0 - u) ** 3)


def _spline_slope(t: np.ndarray) -> np.ndarray:
    u = np.abs(t)
    du = np.where(u <= 0.5, -12.0 * u + 18.0 * u ** 2, -6.0 * (1.0 - u) ** 2)
    return np.sign(t) * du


_PROFILES = {"smooth-bump": _bump, "raised-cosine": _cosine, "cubic-spline-hat": _spline}
_SLOPES = {"smooth-bump": _bump_slope, "raised-cosine": _cosine_slope, "cubic-spline-hat": _spline_slope}


def _edge(s: np.ndarray) -> np.ndarray:
    # exp(-1/s) for s > 0, else 0
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _edge_slope(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def _smoothstep(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """C-infinity step from 0 (s <= 0) to 1 (s >= 1) and its derivative in s."""
    p, q = _edge(s), _edge(1.0 - s)
    dp, dq = _edge_slope(s), -_edge_slope(1.0 - s)
    denom = p + q
    return p / denom, (dp * q - p * dq) / denom ** 2


def _plateau(f: TestFunction, x: np.ndarray, order: int) -> np.ndarray:
    a, b = f.support
    c, d = f.plateau
    rise, drise = _smoothstep((x - a) / (c - a))
    fall, dfall = _smoothstep((b - x) / (b - d))
    if order == 0:
        return f.amplitude * rise * fall
    return f.amplitude * (drise / (c - a) * fall - rise * dfall / (b - d))
