"""Finite-dimensional self-adjoint operator algebra.

Construction with the symmetrization rule, cached eigendecomposition,
functional calculus, traces, norms and counting functions.
"""

import logging
from typing import Callable, Tuple, Union

import numpy as np
import scipy.linalg

from src.models import (
    EigenSystem,
    HermitianOperator,
    PerturbationPath,
    SpectralShiftError,
    TestFunction,
)
from src.testfn import evaluate_array

logger = logging.getLogger(__name__)

SYMMETRIZATION_TOL = 1e-12

ScalarFunction = Union[TestFunction, Callable[[np.ndarray], np.ndarray]]


class NonHermitianInput(SpectralShiftError):
    """Raised when a matrix is too far from self-adjoint to be symmetrized."""


class DimensionMismatch(SpectralShiftError):
    """Raised when operators of different dimension are combined."""


def hermitian(entries) -> HermitianOperator:
    """Build a HermitianOperator, symmetrizing small asymmetries.

    Args:
        entries: Square array-like of real or complex values.

    Returns:
        A HermitianOperator whose entries are exactly conjugate-symmetric.

    Raises:
        NonHermitianInput: If the input is not square, is empty, or
            ``||H - H*||_F`` exceeds ``1e-12 * max(1, ||H||_F)``.
    """
    a = np.array(entries, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NonHermitianInput(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonHermitianInput("matrix has non-finite entries")

    asymmetry = np.linalg.norm(a - a.conj().T)
    scale = max(1.0, float(np.linalg.norm(a)))
    if asymmetry > SYMMETRIZATION_TOL * scale:
        raise NonHermitianInput(
            f"asymmetry ||H - H*||_F = {asymmetry:.3e} exceeds {SYMMETRIZATION_TOL * scale:.3e}"
        )
    sym = (a + a.conj().T) / 2
    sym.setflags(write=False)
    return HermitianOperator(entries=sym)


def diagonal(values) -> HermitianOperator:
    return hermitian(np.diag(np.asarray(values, dtype=float)))


def identity(dim: int) -> HermitianOperator:
    return hermitian(np.eye(dim))


def zero(dim: int) -> HermitianOperator:
    return hermitian(np.zeros((dim, dim)))


def eigensystem(h: HermitianOperator) -> EigenSystem:
    """Return the ascending eigensystem of ``h``, computing it at most once."""
    if h._eigensystem:
        return h._eigensystem[0]
    with h._lock:
        if not h._eigensystem:
            _check_hermitian(h)
            values, vectors = scipy.linalg.eigh(h.entries)
            logger.debug("eigendecomposed %dx%d operator", h.dim, h.dim)
            values.setflags(write=False)
            vectors.setflags(write=False)
            h._eigensystem.append(EigenSystem(eigenvalues=values, eigenvectors=vectors))
    return h._eigensystem[0]


def eigenvalues(h: HermitianOperator) -> np.ndarray:
    return eigensystem(h).eigenvalues


def apply_function(h: HermitianOperator, f: ScalarFunction) -> HermitianOperator:
    """Functional calculus ``f(h) = U f(Lambda) U*``.

    ``f`` is a TestFunction or any vectorized real function.
    """
    es = eigensystem(h)
    fvals = _evaluate_scalar(f, es.eigenvalues)
    u = es.eigenvectors
    return hermitian((u * fvals) @ u.conj().T)


def trace(a: HermitianOperator) -> float:
    return float(np.trace(a.entries).real)


def trace_norm(a: HermitianOperator) -> float:
    return float(np.sum(np.abs(eigenvalues(a))))


def operator_norm(a: HermitianOperator) -> float:
    return float(np.max(np.abs(eigenvalues(a))))


def counting_function(h: HermitianOperator, lam: float) -> int:
    """N_H(lam) = #{i : lambda_i <= lam}."""
    return int(np.searchsorted(eigenvalues(h), lam, side="right"))


def add(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    _check_dims(a, b)
    return hermitian(a.entries + b.entries)


def subtract(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    _check_dims(a, b)
    return hermitian(a.entries - b.entries)


def scale(a: HermitianOperator, c: float) -> HermitianOperator:
    return hermitian(c * a.entries)


def conjugate(h: HermitianOperator, u: np.ndarray) -> HermitianOperator:
    """Return ``U H U*`` for a unitary ``u``, symmetrizing rounding noise."""
    m = u @ h.entries @ u.conj().T
    return hermitian((m + m.conj().T) / 2)


def is_zero(a: HermitianOperator) -> bool:
    return not np.any(a.entries)


def make_path(h0: HermitianOperator, h1: HermitianOperator) -> PerturbationPath:
    _check_dims(h0, h1)
    return PerturbationPath(h0=h0, v=subtract(h1, h0))


def path_at(path: PerturbationPath, r: float) -> HermitianOperator:
    """Operator H_r = H0 + r V.

    Sums and real multiples of exactly conjugate-symmetric matrices stay
    exactly conjugate-symmetric, so the result skips re-validation.
    """
    _check_dims(path.h0, path.v)
    entries = path.h0.entries + r * path.v.entries
    entries.setflags(write=False)
    return HermitianOperator(entries=entries)


def path_end(path: PerturbationPath) -> HermitianOperator:
    return path_at(path, 1.0)


def spectral_window(*ops: HermitianOperator) -> Tuple[float, float, float]:
    """Joint spectrum bounds ``(low, high, diameter)``.

    A degenerate joint spectrum falls back to ``max(1, |high|)`` as diameter.
    """
    low = min(float(eigenvalues(op)[0]) for op in ops)
    high = max(float(eigenvalues(op)[-1]) for op in ops)
    diameter = high - low if high > low else max(1.0, abs(high))
    return low, high, diameter


def check_same_dim(*ops: HermitianOperator) -> None:
    for op in ops[1:]:
        _check_dims(ops[0], op)


# -- internal helpers ---------------------------------------------------------


def _check_dims(a: HermitianOperator, b: HermitianOperator) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"operator dimensions differ: {a.dim} vs {b.dim}")


def _check_hermitian(h: HermitianOperator) -> None:
    a = h.entries
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    asymmetry = np.linalg.norm(a - a.conj().T)
    if asymmetry > SYMMETRIZATION_TOL * max(1.0, float(np.linalg.norm(a))):
        raise NonHermitianInput(f"asymmetry ||H - H*||_F = {asymmetry:.3e}")


def _evaluate_scalar(f: ScalarFunction, x: np.ndarray) -> np.ndarray:
    if isinstance(f, TestFunction):
        return evaluate_array(f, x, 0)
    return np.asarray(f(x), dtype=float)
