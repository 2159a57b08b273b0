"""Seeded random models for the verification suites.

Every case draws from its own Philox-4x64-10 counter-based stream keyed with
``seed + (case_index << 64)``, so a case can be regenerated on its own and the
suites replicate for a fixed seed regardless of execution order.
"""

from typing import Tuple

import numpy as np

from src.models import HermitianOperator, LabeledOperator, PartLabel, TestFunction
from src.operators import eigenvalues, hermitian
from src.testfn import make_test_function

SMOOTH_FAMILIES = ("smooth-bump", "raised-cosine", "cubic-spline-hat")


def case_rng(seed: int, case_index: int) -> np.random.Generator:
    """Independent generator for one suite case."""
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed + (case_index << 64)))


def random_hermitian(rng: np.random.Generator, dim: int, real: bool = False) -> HermitianOperator:
    """Unit-scale Gaussian entries, symmetrized as (A + A*) / 2."""
    a = rng.standard_normal((dim, dim))
    if not real:
        a = a + 1j * rng.standard_normal((dim, dim))
    return hermitian((a + a.conj().T) / 2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_test_function(
    rng: np.random.Generator,
    *ops: HermitianOperator,
    family: str = None,
) -> TestFunction:
    """A test function whose support overlaps the joint spectrum of ``ops``."""
    low = min(float(eigenvalues(op)[0]) for op in ops)
    high = max(float(eigenvalues(op)[-1]) for op in ops)
    width = max(high - low, 1.0)
    if family is None:
        family = SMOOTH_FAMILIES[int(rng.integers(len(SMOOTH_FAMILIES)))]
    a = low - 0.25 * width + 0.5 * width * float(rng.random())
    b = high + 0.25 * width - 0.5 * width * float(rng.random())
    if b - a < 0.25 * width:
        a, b = low - 0.25 * width, high + 0.25 * width
    amplitude = 0.5 + float(rng.random())
    if family == "plateau-bump":
        c = a + (b - a) * (0.1 + 0.3 * float(rng.random()))
        d = b - (b - a) * (0.1 + 0.3 * float(rng.random()))
        return make_test_function(family, a, b, amplitude, (c, d))
    return make_test_function(family, a, b, amplitude)


def random_labeled(
    rng: np.random.Generator,
    dims: Tuple[int, ...] = (3, 2),
    labels: Tuple[PartLabel, ...] = (PartLabel.AC, PartLabel.SING),
) -> LabeledOperator:
    return LabeledOperator(
        blocks=tuple((random_hermitian(rng, d), PartLabel(lab)) for d, lab in zip(dims, labels))
    )


def regular_levels(rng: np.random.Generator, count: int, *ops: HermitianOperator, margin: float = 1e-3):
    """Levels inside the joint spectral range that keep ``margin`` (relative) from every eigenvalue."""
    joint = np.sort(np.concatenate([eigenvalues(op) for op in ops]))
    low, high = float(joint[0]), float(joint[-1])
    width = max(high - low, 1.0)
    levels = []
    while len(levels) < count:
        lam = low - 0.1 * width + 1.2 * width * float(rng.random())
        if float(np.min(np.abs(joint - lam))) > margin * width:
            levels.append(lam)
    return levels

