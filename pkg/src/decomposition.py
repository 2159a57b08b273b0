"""Block-labeled surrogate of the absolutely continuous / singular split.

A LabeledOperator is a block direct sum whose blocks carry a PartLabel.
Perturbations must be block diagonal with the same block dims and labels,
so every H_r along a LabeledPath keeps the labeling and the part projector
stays constant along the path. phi of a part is computed on the restricted
block matrices and embedded, which keeps phi(0) off the other blocks.
"""

from typing import List, Sequence

import numpy as np
import scipy.linalg

from src.engines import averaging_integrand, ssf_averaging
from src.models import (
    ContinuityRow,
    ContinuitySplit,
    HermitianOperator,
    LabeledOperator,
    LabeledPath,
    PartLabel,
    PerturbationPath,
    SpectralShiftError,
    TestFunction,
)
from src.operators import add, apply_function, hermitian, path_at, scale, subtract, trace_norm
from src.quadrature import integrate
from src.testfn import sup_norm


class LabelStructureViolation(SpectralShiftError):
    """Raised when labeled inputs are not conformal or a matrix has off-block entries."""


def labeled(*blocks) -> LabeledOperator:
    """Build a LabeledOperator from ``(HermitianOperator, label)`` pairs."""
    if not blocks:
        raise LabelStructureViolation("a labeled operator needs at least one block")
    return LabeledOperator(blocks=tuple((op, PartLabel(label)) for op, label in blocks))


def assemble(h: LabeledOperator) -> HermitianOperator:
    """The block-diagonal operator in the standard ordering of blocks."""
    return hermitian(scipy.linalg.block_diag(*[op.entries for op, _ in h.blocks]))


def part_projector(h: LabeledOperator, label: PartLabel) -> HermitianOperator:
    """Orthogonal projector onto the basis indices carrying ``label``."""
    label = PartLabel(label)
    mask = np.concatenate(
        [np.full(op.dim, 1.0 if lab is label else 0.0) for op, lab in h.blocks]
    )
    return hermitian(np.diag(mask))


def check_conformal(*ops: LabeledOperator) -> None:
    first = ops[0]
    for other in ops[1:]:
        if other.block_dims != first.block_dims or other.labels != first.labels:
            raise LabelStructureViolation(
                f"labeled structure differs: dims {first.block_dims} labels "
                f"{[l.value for l in first.labels]} vs dims {other.block_dims} "
                f"labels {[l.value for l in other.labels]}"
            )


def make_labeled_path(h0: LabeledOperator, v: LabeledOperator) -> LabeledPath:
    check_conformal(h0, v)
    return LabeledPath(h0=h0, v=v)


def split_like(matrix, like: LabeledOperator) -> LabeledOperator:
    """Cut a full matrix into blocks conformal with ``like``.

    Raises:
        LabelStructureViolation: If any entry outside the diagonal blocks is nonzero.
    """
    full = hermitian(matrix)
    if full.dim != like.dim:
        raise LabelStructureViolation(f"matrix dim {full.dim} does not match labeled dim {like.dim}")
    mask = scipy.linalg.block_diag(*[np.ones((d, d)) for d in like.block_dims]).astype(bool)
    if np.any(full.entries[~mask]):
        raise LabelStructureViolation("matrix has entries coupling different labeled blocks")
    blocks = []
    start = 0
    for op, label in like.blocks:
        stop = start + op.dim
        blocks.append((hermitian(full.entries[start:stop, start:stop]), label))
        start = stop
    return LabeledOperator(blocks=tuple(blocks))


def labeled_add(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    check_conformal(a, b)
    return LabeledOperator(blocks=tuple((add(x, y), lab) for (x, lab), (y, _) in zip(a.blocks, b.blocks)))


def labeled_subtract(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    check_conformal(a, b)
    return LabeledOperator(blocks=tuple((subtract(x, y), lab) for (x, lab), (y, _) in zip(a.blocks, b.blocks)))


def labeled_scale(a: LabeledOperator, c: float) -> LabeledOperator:
    return LabeledOperator(blocks=tuple((scale(x, c), lab) for x, lab in a.blocks))


def flatten(path: LabeledPath) -> PerturbationPath:
    return PerturbationPath(h0=assemble(path.h0), v=assemble(path.v))


def sub_paths(path: LabeledPath, label: PartLabel) -> List[PerturbationPath]:
    """Per-block paths of the blocks carrying ``label``."""
    check_conformal(path.h0, path.v)
    label = PartLabel(label)
    return [
        PerturbationPath(h0=h, v=v)
        for (h, lab), (v, _) in zip(path.h0.blocks, path.v.blocks)
        if lab is label
    ]


def ssf_part(path: LabeledPath, label: PartLabel, f: TestFunction, tol: float) -> float:
    """xi^(label)(phi) = integral over r of Tr(V phi(H_r) E^(label)).

    Raises:
        LabelStructureViolation: If the path is not conformal.
        QuadratureFailure: On node-budget exhaustion.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    parts = [p for p in sub_paths(path, label) if np.any(p.v.entries)]
    if not parts:
        return 0.0
    return integrate(lambda r: sum(averaging_integrand(p, f, r) for p in parts), 0.0, 1.0, tol)


def ssf_singular_by_complement(path: LabeledPath, f: TestFunction, tol: float) -> float:
    """xi^(s)(phi) obtained as xi(phi) - xi^(a)(phi)."""
    total = ssf_averaging(flatten(path), f, tol)
    return total - ssf_part(path, PartLabel.AC, f, tol)


def part_additivity_residual(
    h0: LabeledOperator,
    v1: LabeledOperator,
    v2: LabeledOperator,
    label: PartLabel,
    f: TestFunction,
    tol: float,
) -> float:
    """|xi^(l)_{H0+V2,H0}(phi) - xi^(l)_{H0+V2,H0+V1}(phi) - xi^(l)_{H0+V1,H0}(phi)|."""
    check_conformal(h0, v1, v2)
    h1 = labeled_add(h0, v1)
    total = ssf_part(LabeledPath(h0, v2), label, f, tol)
    first = ssf_part(LabeledPath(h1, labeled_subtract(v2, v1)), label, f, tol)
    second = ssf_part(LabeledPath(h0, v1), label, f, tol)
    return abs(total - first - second)


def weak_continuity_table(
    h0: LabeledOperator,
    v: LabeledOperator,
    vseq: Sequence[LabeledOperator],
    f: TestFunction,
    tol: float,
) -> List[ContinuityRow]:
    """Rows ``(||V - Vn||_1, |xi^(a)_{H0+Vn,H0}(phi) - xi^(a)_{H0+V,H0}(phi)|)``.

    ``bound`` on each row is ``2 * ||V - Vn||_1 * ||phi||_inf + 2 * tol``.
    """
    check_conformal(h0, v, *vseq)
    reference = ssf_part(LabeledPath(h0, v), PartLabel.AC, f, tol)
    rows = []
    for vn in vseq:
        gap = trace_norm(assemble(labeled_subtract(v, vn)))
        value = ssf_part(LabeledPath(h0, vn), PartLabel.AC, f, tol)
        rows.append(_row(gap, abs(value - reference), f, tol))
    return rows


def reference_continuity_table(
    h0: LabeledOperator,
    v: LabeledOperator,
    v1: LabeledOperator,
    vseq: Sequence[LabeledOperator],
    f: TestFunction,
    tol: float,
) -> List[ContinuityRow]:
    """Rows ``(||V1 - Vn||_1, |xi^(a)_{H0+V,H0+Vn}(phi) - xi^(a)_{H0+V,H0+V1}(phi)|)``.

    Continuity in the reference operator, which is what carries additivity
    from an approximating sequence Vn over to V1.
    """
    check_conformal(h0, v, v1, *vseq)

    def shifted(vk: LabeledOperator) -> float:
        return ssf_part(
            LabeledPath(labeled_add(h0, vk), labeled_subtract(v, vk)), PartLabel.AC, f, tol
        )

    reference = shifted(v1)
    rows = []
    for vn in vseq:
        gap = trace_norm(assemble(labeled_subtract(v1, vn)))
        rows.append(_row(gap, abs(shifted(vn) - reference), f, tol))
    return rows


def continuity_split(
    h0: LabeledOperator,
    v: LabeledOperator,
    vn: LabeledOperator,
    f: TestFunction,
    r: float,
) -> ContinuitySplit:
    """Split the AC integrand difference at ``r`` into a perturbation and a resolvent term."""
    check_conformal(h0, v, vn)
    projector = part_projector(h0, PartLabel.AC)
    phi_v = _part_function(h0, v, f, r, PartLabel.AC)
    phi_vn = _part_function(h0, vn, f, r, PartLabel.AC)
    big_v = assemble(v)
    big_vn = assemble(vn)
    diff = subtract(big_v, big_vn)
    perturbation = _trace_product(diff, phi_vn)
    resolvent = _trace_product(big_v, subtract(phi_v, phi_vn))
    gap = _trace_product(big_v, phi_v) - _trace_product(big_vn, phi_vn)
    # only the AC block of V - Vn meets phi(.)^(a)
    restricted = hermitian(projector.entries @ diff.entries @ projector.entries)
    return ContinuitySplit(
        perturbation_term=perturbation,
        resolvent_term=resolvent,
        perturbation_bound=trace_norm(restricted) * sup_norm(f),
        integrand_gap=gap,
    )


# -- internal helpers ---------------------------------------------------------


def _row(gap: float, ssf_gap: float, f: TestFunction, tol: float) -> ContinuityRow:
    return ContinuityRow(trace_norm_gap=gap, ssf_gap=ssf_gap, bound=2.0 * gap * sup_norm(f) + 2.0 * tol)


def _part_function(h0: LabeledOperator, v: LabeledOperator, f: TestFunction, r: float, label: PartLabel) -> HermitianOperator:
    """phi(H_r^(label)) embedded by zero, computed block by block."""
    pieces = []
    for (h, lab), (vb, _) in zip(h0.blocks, v.blocks):
        if lab is label:
            pieces.append(apply_function(path_at(PerturbationPath(h, vb), r), f).entries)
        else:
            pieces.append(np.zeros((h.dim, h.dim)))
    return hermitian(scipy.linalg.block_diag(*pieces))


def _trace_product(a: HermitianOperator, b: HermitianOperator) -> float:
    return float(np.trace(a.entries @ b.entries).real)
