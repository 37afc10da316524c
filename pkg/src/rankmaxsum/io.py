"""Delimited-text input and output for design matrices and responses."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Dataset, DimensionError, LengthMismatch, RankMaxSumError


class ParseError(RankMaxSumError):
    pass


@dataclass(frozen=True)
class Table:
    values: np.ndarray
    header: list[str] | None


def sniff_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def read_table(path, header: bool = False, delimiter: str | None = None) -> Table:
    """Parse a comma- or tab-delimited numeric table.

    Errors name the 1-based line and column of the offending cell.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file: {exc.strerror}") from exc
    lines = text.splitlines()
    if delimiter is None:
        first = next((ln for ln in lines if ln.strip()), "")
        delimiter = sniff_delimiter(first)
    rows: list[list[float]] = []
    names = None
    width = None
    for lineno, fields in enumerate(csv.reader(lines, delimiter=delimiter), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if header and names is None:
            names = [f.strip() for f in fields]
            width = len(names)
            continue
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} fields, found {len(fields)}")
        row = []
        for col, cell in enumerate(fields, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {col}: cannot parse {cell.strip()!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}:{lineno}: column {col}: non-finite value {cell.strip()!r}")
            row.append(v)
        rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Table(values=np.array(rows, dtype=np.float64), header=names)


def write_table(path, values, header: list[str] | None = None, delimiter: str = ",") -> None:
    """Write values with ``repr`` precision so that :func:`read_table` round-trips exactly."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in values:
            w.writerow([repr(float(v)) for v in row])


def _column_index(table: Table, column: str) -> int:
    if table.header is not None and column in table.header:
        return table.header.index(column)
    try:
        idx = int(column)
    except ValueError:
        raise ParseError(f"no column named {column!r}") from None
    if not 0 <= idx < table.values.shape[1]:
        raise DimensionError(f"column index {idx} out of range for {table.values.shape[1]} columns")
    return idx


def load_dataset(design_path, response_path=None, response_column: str | None = None,
                 header: bool = False, delimiter: str | None = None) -> Dataset:
    """Build a Dataset from a design file plus either a response file or a column of the design."""
    if (response_path is None) == (response_column is None):
        raise ParseError("give exactly one of a response file or a response column")
    design = read_table(design_path, header=header, delimiter=delimiter)
    if response_column is not None:
        j = _column_index(design, response_column)
        y = design.values[:, j]
        X = np.delete(design.values, j, axis=1)
    else:
        resp = read_table(response_path, header=header, delimiter=delimiter)
        if resp.values.shape[1] != 1:
            raise ParseError(f"{response_path}: response file must have one column, "
                             f"found {resp.values.shape[1]}")
        y = resp.values[:, 0]
        X = design.values
        if y.shape[0] != X.shape[0]:
            raise LengthMismatch(f"{response_path}: {y.shape[0]} responses for "
                                 f"{X.shape[0]} design rows in {design_path}")
    if X.shape[1] < 1:
        raise DimensionError(f"{design_path}: no covariate columns")
    return Dataset(X=X, y=y)
