"""Series ingestion from delimited text files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .errors import ConfigurationError, DataError


def _as_float(cell: str) -> float | None:
    try:
        v = float(cell.strip())
    except ValueError:
        return None
    return v


def parse_series(path, column: int | str = 0) -> list[float]:
    """Read one column of a CSV file as floats.

    ``column`` is a 0-based index (``int`` or digit string) or a header name.
    A header row is assumed iff the first non-empty row's selected cell is
    not numeric.  Blank lines are skipped; errors cite 1-based file rows.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file not found: {path}")
    if isinstance(column, str) and column.strip().lstrip("-").isdigit():
        column = int(column)
    values: list[float] = []
    idx: int | None = column if isinstance(column, int) else None
    first = True
    with path.open(newline="") as fh:
        for rowno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if first:
                first = False
                if idx is None:
                    names = [c.strip() for c in row]
                    if column not in names:
                        raise ConfigurationError(f"column {column!r} not found in header {names}")
                    idx = names.index(column)
                    continue
                if idx < 0 or idx >= len(row):
                    raise ConfigurationError(f"column {idx} out of range at row {rowno}")
                if _as_float(row[idx]) is None:
                    continue  # header
            if idx >= len(row):
                raise DataError(f"row {rowno}: missing column {idx}")
            v = _as_float(row[idx])
            if v is None:
                raise DataError(f"row {rowno}: cannot parse {row[idx]!r} as a number")
            if not math.isfinite(v):
                raise DataError(f"row {rowno}: non-finite value {row[idx]!r}")
            values.append(v)
    if not values:
        raise DataError(f"no data rows in {path}")
    return values
