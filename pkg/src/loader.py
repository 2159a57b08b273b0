"""Load operator files (Matrix Market), labeled-model manifests and YAML job configs."""

import os
from typing import List, Tuple

import numpy as np
import scipy.io
import yaml

from src.models import HermitianOperator, LabeledOperator, PartLabel, SpectralShiftError
from src.operators import NonHermitianInput, hermitian


class ModelParseError(SpectralShiftError):
    """Raised when an operator file, manifest or config fails to load."""


def load_operator(path: str) -> HermitianOperator:
    """Load a Hermitian operator from a Matrix Market file.

    Accepts ``coordinate ... hermitian`` (or symmetric) files and dense
    ``array ... general`` files; the symmetrization rule of ``hermitian``
    applies to both.

    Raises:
        ModelParseError: If the file is missing, unreadable, or not Hermitian.
    """
    if not os.path.isfile(path):
        raise ModelParseError(f"operator file not found: {path}")
    try:
        raw = scipy.io.mmread(path)
    except (ValueError, OSError, IndexError, RuntimeError) as exc:
        raise ModelParseError(f"failed to parse {path}: {exc}") from exc

    dense = raw.toarray() if hasattr(raw, "toarray") else np.asarray(raw)
    try:
        return hermitian(dense)
    except NonHermitianInput as exc:
        raise ModelParseError(f"{path}: {exc}") from exc


def save_operator(path: str, h: HermitianOperator) -> None:
    """Write ``h`` as a dense ``array complex hermitian`` Matrix Market file."""
    parent = os.path.dirname(path)
    if parent and not os.path.isdir(parent):
        os.makedirs(parent, exist_ok=True)
    scipy.io.mmwrite(path, np.asarray(h.entries), field="complex", symmetry="hermitian", precision=17)


def load_labeled(path: str) -> LabeledOperator:
    """Load a labeled model from a manifest.

    Each non-blank, non-comment line reads ``<block file> label=AC|SING``;
    block paths are resolved relative to the manifest's directory.

    Raises:
        ModelParseError: On a missing manifest, a malformed line, an unknown
            label, or a block file that fails to load.
    """
    if not os.path.isfile(path):
        raise ModelParseError(f"manifest not found: {path}")
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r") as f:
        lines = f.readlines()

    errors: List[str] = []
    entries: List[Tuple[str, str]] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2 or not parts[1].startswith("label="):
            errors.append(f"line {lineno}: expected '<file> label=AC|SING', got {text!r}")
            continue
        label = parts[1][len("label="):]
        if label not in (PartLabel.AC.value, PartLabel.SING.value):
            errors.append(f"line {lineno}: unknown label {label!r}")
            continue
        entries.append((os.path.join(base, parts[0]), label))

    if not entries and not errors:
        errors.append("manifest lists no blocks")
    if errors:
        raise ModelParseError(
            f"manifest {path} is invalid:\n  - " + "\n  - ".join(errors)
        )

    blocks = tuple((load_operator(block), PartLabel(label)) for block, label in entries)
    return LabeledOperator(blocks=blocks)


def load_config(path: str) -> dict:
    """Load a YAML job config: a mapping of option names, optionally per subcommand.

    Raises:
        ModelParseError: If the file is missing, unparseable, or not a mapping.
    """
    if not os.path.isfile(path):
        raise ModelParseError(f"config file not found: {path}")
    try:
        with open(path, "r") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ModelParseError(f"failed to parse {path}: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ModelParseError("config must be a mapping at the top level")
    return raw
