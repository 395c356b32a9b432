"""Strict reader for solver trajectory CSV files.

The solver writes one header row followed by float samples:

    s,a,da,b,db,f,df,Q,R,H

Anything else is rejected with SchemaError rather than coerced.  The
renderer promises to draw exactly what the solver wrote, so a file that
deviates from the contract is an input error, not something to repair
silently.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

EXPECTED_COLUMNS = ("s", "a", "da", "b", "db", "f", "df", "Q", "R", "H")


class SchemaError(ValueError):
    """A trajectory file does not match the CSV contract."""


def read_trajectory(path: str | Path) -> dict[str, np.ndarray]:
    """Parse one trajectory CSV into a column name -> float array mapping.

    Raises SchemaError when the file is empty, the header deviates from
    EXPECTED_COLUMNS in any way (missing, extra, renamed, or reordered
    columns), a data row has the wrong width, or a cell does not parse
    as a float.  A header with no sample rows is also rejected: there is
    nothing to plot.  FileNotFoundError propagates untouched.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        rows = csv.reader(handle)
        try:
            header = next(rows)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a trajectory header") from None
        if tuple(header) != EXPECTED_COLUMNS:
            raise SchemaError(
                f"{path}: header {','.join(header)!r} does not match "
                f"{','.join(EXPECTED_COLUMNS)!r}"
            )
        columns: list[list[float]] = [[] for _ in EXPECTED_COLUMNS]
        for lineno, row in enumerate(rows, start=2):
            if len(row) != len(EXPECTED_COLUMNS):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(EXPECTED_COLUMNS)} fields, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric cell in {row!r}") from None
            for store, value in zip(columns, values):
                store.append(value)
    if not columns[0]:
        raise SchemaError(f"{path}: header only, no samples")
    return {name: np.asarray(col) for name, col in zip(EXPECTED_COLUMNS, columns)}
