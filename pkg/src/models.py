"""Data models for operators, test functions, step densities, and job configuration."""

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np


class SpectralShiftError(Exception):
    """Base class for every library failure mapped to exit code 2 by the CLI."""


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns orthonormal


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense self-adjoint matrix with a write-once eigensystem cache.

    Build instances through ``src.operators.hermitian`` so the
    symmetrization rule is applied; the constructor itself trusts its input.
    """

    entries: np.ndarray
    _eigensystem: List[EigenSystem] = field(
        default_factory=list, repr=False, compare=False
    )
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class PerturbationPath:
    h0: HermitianOperator
    v: HermitianOperator


@dataclass(frozen=True)
class TestFunction:
    """Closed-form compactly supported test function.

    ``family`` is one of ``smooth-bump``, ``raised-cosine``,
    ``cubic-spline-hat`` or ``plateau-bump``; the plateau family needs
    ``plateau=(c, d)`` with ``a < c <= d < b``.
    """

    __test__ = False  # not a pytest class

    family: str
    support: Tuple[float, float]
    amplitude: float = 1.0
    plateau: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class StepFunction:
    """Integer-valued right-open step function, zero outside [b0, bm).

    ``values[k]`` holds on ``[breakpoints[k], breakpoints[k + 1])``. The zero
    function has no breakpoints.
    """

    breakpoints: Tuple[float, ...] = ()
    values: Tuple[int, ...] = ()


class EngineChoice(str, Enum):
    COUNTING = "counting"
    AVERAGING = "averaging"
    KREIN = "krein"


@dataclass(frozen=True)
class KreinSchedule:
    lambda_grid: Tuple[float, ...]
    epsilon_start: float = 1e-2
    epsilon_min: float = 1e-13
    refinement_factor: float = 0.1


class PartLabel(str, Enum):
    AC = "AC"
    SING = "SING"


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    blocks: Tuple[Tuple[HermitianOperator, PartLabel], ...]

    @property
    def dim(self) -> int:
        return sum(block.dim for block, _ in self.blocks)

    @property
    def labels(self) -> Tuple[PartLabel, ...]:
        return tuple(label for _, label in self.blocks)

    @property
    def block_dims(self) -> Tuple[int, ...]:
        return tuple(block.dim for block, _ in self.blocks)


@dataclass(frozen=True, eq=False)
class LabeledPath:
    h0: LabeledOperator
    v: LabeledOperator


@dataclass(frozen=True)
class ContinuityRow:
    trace_norm_gap: float
    ssf_gap: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.ssf_gap <= self.bound


@dataclass(frozen=True)
class ContinuitySplit:
    perturbation_term: float  # Tr((V - Vn) phi(H0 + r Vn)^(a))
    resolvent_term: float  # Tr(V (phi(H0 + r V)^(a) - phi(H0 + r Vn)^(a)))
    perturbation_bound: float  # ||V - Vn||_1 ||phi||_inf
    integrand_gap: float  # Tr(V phi(H0 + rV)^(a)) - Tr(Vn phi(H0 + r Vn)^(a))


@dataclass(frozen=True)
class EigenPath:
    parameters: Tuple[float, ...]
    curves: np.ndarray  # shape (len(parameters), dim)


@dataclass(frozen=True)
class CrossingEvent:
    r_star: float
    curve_index: int
    direction: int  # +1 upward through the level, -1 downward


@dataclass
class CheckResult:
    check: str
    engine: str
    residual: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.bound)


@dataclass
class JobConfig:
    subcommand: str  # ssf, flow, decompose, verify, compare-engines
    inputs: Dict[str, str] = field(default_factory=dict)
    engine: EngineChoice = EngineChoice.COUNTING
    tol: float = 1e-8
    seed: int = 7
    phi: Optional[TestFunction] = None
    lam: Optional[float] = None
    grid: Optional[Tuple[float, float, int]] = None
    max_step: float = 0.05
    cases: Optional[int] = None
    out: Optional[str] = None
    log_path: Optional[str] = None


@dataclass
class EvidenceEvent:
    ts: str
    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    outcome: str = "computed"
    exit_code: int = 0
