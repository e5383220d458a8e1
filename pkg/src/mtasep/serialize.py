"""Deterministic JSON encodings for matrices, kernels and simulation outcomes."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from . import algebra
from .catalog import ColumnSumError, InteractionMatrix, TwoSpeciesMatrix, check_column_sums


def dumps(obj) -> str:
    """Canonical text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _rows(entries: np.ndarray) -> list:
    return [[[v.numerator, v.denominator] for v in (algebra.as_fraction(x) for x in row)] for row in entries]


def matrix_to_dict(m) -> dict:
    if isinstance(m, TwoSpeciesMatrix):
        return {"label": m.label, "N": 2, "kind": "two-species", "rows": _rows(m.entries)}
    return {"label": m.provenance, "N": m.N, "kind": "interaction", "rows": _rows(m.entries)}


def matrix_from_dict(d: dict):
    """Inverse of :func:`matrix_to_dict`; column sums are re-validated."""
    try:
        label, N, rows = d["label"], int(d["N"]), d["rows"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix record: {exc}") from None
    entries = algebra.exact([[Fraction(int(p), int(q)) for p, q in row] for row in rows])
    check_column_sums(entries, label)
    if d.get("kind", "interaction") == "two-species":
        return TwoSpeciesMatrix(label, entries)
    return InteractionMatrix(N, entries, label)


def export_matrices(matrices: Iterable, path: str | Path | None = None) -> str:
    text = dumps({"matrices": [matrix_to_dict(m) for m in matrices]})
    if path is not None:
        Path(path).write_text(text)
    return text


def import_matrices(source: str | Path) -> list:
    """Read a matrix file (or JSON text); raises ColumnSumError on bad columns."""
    p = Path(source) if not str(source).lstrip().startswith("{") else None
    data = json.loads(p.read_text() if p is not None else str(source))
    records = data["matrices"] if "matrices" in data else [data]
    return [matrix_from_dict(r) for r in records]


__all__ = ["ColumnSumError", "dumps", "export_matrices", "import_matrices", "matrix_from_dict", "matrix_to_dict"]
