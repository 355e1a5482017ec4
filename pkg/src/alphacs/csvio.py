"""Plain-CSV readers and writers.

Matrices are row-major with no header; vectors are a single dense row. All
floating-point output uses 17 significant digits so values round-trip
exactly.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["format_float", "write_matrix", "read_matrix", "write_vector", "read_vector"]


def format_float(v) -> str:
    return f"{float(v):.17g}"


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_vector(path, v) -> None:
    write_matrix(path, np.asarray(v, dtype=float).reshape(1, -1))


def read_matrix(path) -> np.ndarray:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    """Read a vector stored as one row, one column, or one value per line."""
    M = read_matrix(path)
    if 1 not in M.shape:
        raise ValueError(f"{path}: expected a vector, found shape {M.shape}")
    return M.reshape(-1)
