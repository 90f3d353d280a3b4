"""Matrix file I/O: plain CSV of decimal reals, NaN tokens marking unobserved cells.

A JSON sidecar with the same basename plus ".meta.json" may carry dims and
provenance.  Parse errors report the offending row and column.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .linalg import MaskedMatrix, ObservationMask


def _parse_rows(path) -> list[list[float]]:
    rows: list[list[float]] = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    with fh:
        for i, record in enumerate(csv.reader(fh)):
            if not record:
                continue
            row = []
            for j, tok in enumerate(record):
                tok = tok.strip()
                try:
                    row.append(float(tok))
                except ValueError:
                    raise InvalidInput(
                        f"{path}: row {i}, column {j}: cannot parse {tok!r} as a real number"
                    ) from None
            rows.append(row)
    if not rows:
        raise InvalidInput(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInput(
                f"{path}: row {i} has {len(row)} columns, expected {width}"
            )
    return rows


def read_dense_csv(path) -> np.ndarray:
    """Fully observed matrix; NaN cells are rejected with their location."""
    rows = _parse_rows(path)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if math.isnan(v):
                raise InvalidInput(f"{path}: row {i}, column {j}: unexpected NaN in dense matrix")
            if math.isinf(v):
                raise InvalidInput(f"{path}: row {i}, column {j}: non-finite value")
    return np.asarray(rows, dtype=float)


def read_masked_csv(path) -> MaskedMatrix:
    """NaN-masked matrix: NaN cells become unobserved, everything else observed."""
    rows = _parse_rows(path)
    a = np.asarray(rows, dtype=float)
    observed = ~np.isnan(a)
    if np.isinf(a[observed]).any():
        raise InvalidInput(f"{path}: contains non-finite observed values")
    return MaskedMatrix(values=np.where(observed, a, 0.0), mask=ObservationMask(observed))


def write_dense_csv(path, m: np.ndarray) -> None:
    _write_rows(path, np.asarray(m, dtype=float), None)


def write_masked_csv(path, masked: MaskedMatrix) -> None:
    _write_rows(path, masked.values, masked.mask.observed)


def _write_rows(path, values: np.ndarray, observed: np.ndarray | None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i in range(values.shape[0]):
            toks = []
            for j in range(values.shape[1]):
                if observed is not None and not observed[i, j]:
                    toks.append("NaN")
                else:
                    toks.append(repr(float(values[i, j])))
            fh.write(",".join(toks) + "\n")


def meta_path(path) -> Path:
    p = Path(path)
    return p.with_suffix(p.suffix + ".meta.json") if p.suffix != ".csv" else p.with_suffix(".meta.json")


def write_meta_json(path, meta: dict) -> None:
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_meta_json(path) -> dict | None:
    p = meta_path(path)
    if not p.exists():
        return None
    with open(p, "r", encoding="utf-8") as fh:
        return json.load(fh)
