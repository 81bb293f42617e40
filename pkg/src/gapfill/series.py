"""Parsing, gap segmentation, and output for delimited observation files."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

# Cells are compared against these after stripping surrounding whitespace.
# Empty cells always count as missing, independent of the marker set.
DEFAULT_NA_MARKERS: tuple[str, ...] = ("NA", "NaN", "+")


@dataclass(frozen=True)
class Series:
    """An ordered sequence of scalar or vector observations with gaps.

    Positions are 1-based row order: ``values[i]`` holds the observation at
    position i+1 as a float array of length ``dim``, or None where any
    selected cell was missing. The raw header and rows are kept so observed
    cells can be echoed verbatim on output.
    """

    dim: int
    values: tuple
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    value_columns: tuple[int, ...]
    na_markers: tuple[str, ...] = DEFAULT_NA_MARKERS
    delimiter: str = ","

    def __post_init__(self):
        if self.dim < 1:
            raise DataError("series needs at least one value column")
        observed = 0
        for pos, v in enumerate(self.values, start=1):
            if v is None:
                continue
            observed += 1
            if v.shape != (self.dim,):
                raise DataError(f"value at position {pos} has {v.shape[0]} components, expected {self.dim}")
        if observed == 0:
            raise DataError("no observed values")

    def __len__(self) -> int:
        return len(self.values)

    def value(self, index: int):
        """Observation at 1-based ``index`` (None when missing)."""
        return self.values[index - 1]

    @property
    def missing_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.values, start=1) if v is None)

    @property
    def observed_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.values, start=1) if v is not None)

    @classmethod
    def from_values(cls, values: Sequence, column_names: Sequence[str] | None = None,
                    na_marker: str = "NA", delimiter: str = ",") -> "Series":
        """Build a Series directly from numeric values; None marks a missing point."""
        converted = []
        dim = None
        for v in values:
            if v is None:
                converted.append(None)
                continue
            arr = np.atleast_1d(np.asarray(v, dtype=float))
            if dim is None:
                dim = arr.shape[0]
            converted.append(arr)
        if dim is None:
            raise DataError("no observed values")
        if column_names is not None:
            header = tuple(column_names)
        elif dim == 1:
            header = ("value",)
        else:
            header = tuple(f"v{i + 1}" for i in range(dim))
        rows = []
        for v in converted:
            if v is None:
                rows.append((na_marker,) * dim)
            else:
                rows.append(tuple(repr(float(c)) for c in v))
        return cls(dim=dim, values=tuple(converted), header=header, rows=tuple(rows),
                   value_columns=tuple(range(dim)), na_markers=(na_marker,),
                   delimiter=delimiter)


@dataclass(frozen=True)
class GapSegment:
    """One maximal run of missing positions with its seed window and anchor.

    ``seed_indices`` are the positions feeding the recursion into the gap; they
    may point into an earlier gap, in which case the caller fills gaps left to
    right so those positions carry imputed values by the time they are read.
    ``anchor_index``/``anchor_value`` are None only for a gap that runs to the
    end of the series (open-gap mode).
    """

    gap_start: int
    gap_end: int
    seed_indices: tuple[int, ...]
    anchor_index: int | None
    anchor_value: np.ndarray | None

    @property
    def length(self) -> int:
        return self.gap_end - self.gap_start + 1

    @property
    def indices(self) -> range:
        return range(self.gap_start, self.gap_end + 1)

    @property
    def constrained(self) -> bool:
        return self.anchor_index is not None


def parse_csv(text: str, na_markers: Sequence[str] = DEFAULT_NA_MARKERS,
              value_columns: Sequence[str] | None = None, delimiter: str = ",") -> Series:
    """Parse delimited text with a header row into a Series.

    A cell is missing when it is empty or (after stripping) equals one of
    ``na_markers``; a row whose selected cells are partly missing counts as a
    missing observation, though its non-missing cells are still validated.
    ``value_columns`` selects columns by header name; default is all columns.
    """
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    all_rows = [tuple(r) for r in reader]
    if not all_rows:
        raise DataError("empty input: no header row")
    header = all_rows[0]
    body = all_rows[1:]
    if not body:
        raise DataError("no data rows")
    ncol = len(header)
    # a blank line comes back as a zero-cell row; read it as one fully-empty row
    body = [row if row else ("",) * ncol for row in body]
    for i, row in enumerate(body, start=1):
        if len(row) != ncol:
            raise DataError(f"ragged row {i}: expected {ncol} cells, got {len(row)}")

    if value_columns is None:
        cols = tuple(range(ncol))
    else:
        names = list(value_columns)
        if not names:
            raise DataError("no value columns selected")
        cols = []
        for name in names:
            matches = [i for i, h in enumerate(header) if h.strip() == name]
            if not matches:
                raise DataError(f"unknown column {name!r}; header has {', '.join(header)}")
            cols.append(matches[0])
        cols = tuple(cols)

    markers = tuple(na_markers)
    values = []
    for i, row in enumerate(body, start=1):
        components = []
        missing = False
        for c in cols:
            cell = row[c].strip()
            if cell == "" or cell in markers:
                missing = True
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric value {cell!r} in row {i}, column {header[c]!r}"
                ) from None
            if not math.isfinite(v):
                raise DataError(
                    f"non-finite value {cell!r} in row {i}, column {header[c]!r} "
                    f"(add it to the missing-value markers if it denotes a gap)"
                )
            components.append(v)
        values.append(None if missing else np.array(components))

    if all(v is None for v in values):
        raise DataError("no observed values")
    return Series(dim=len(cols), values=tuple(values), header=tuple(header),
                  rows=tuple(body), value_columns=cols, na_markers=markers,
                  delimiter=delimiter)


def detect_gaps(series: Series, order: int = 1,
                allow_open_gap: bool = False) -> tuple[int, list[GapSegment]]:
    """Segment the series into an observed prefix and maximal gaps.

    Returns ``(prefix_length, segments)`` where ``prefix_length`` is the number
    of observed positions before the first gap and segments are ordered left to
    right. Each gap needs ``order`` seed positions before it and, unless
    ``allow_open_gap`` is set, one observed anchor right after it.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    n = len(series)
    missing = [i for i, v in enumerate(series.values, start=1) if v is None]

    runs = []
    for i in missing:
        if runs and runs[-1][1] == i - 1:
            runs[-1][1] = i
        else:
            runs.append([i, i])

    prefix_length = (missing[0] - 1) if missing else n
    segments = []
    for gap_start, gap_end in runs:
        if gap_start == 1:
            raise DataError("gap has no seed window: the series begins with a missing value")
        if gap_start - order < 1:
            raise DataError(
                f"gap at index {gap_start} needs {order} seed values "
                f"but only {gap_start - 1} positions precede it"
            )
        if gap_end == n:
            if not allow_open_gap:
                raise DataError(
                    f"gap at indices {gap_start}..{gap_end} has no anchor: the series ends "
                    f"inside the gap (enable open-gap mode to fill it without a terminal value)"
                )
            anchor_index = None
            anchor_value = None
        else:
            anchor_index = gap_end + 1
            anchor_value = series.values[gap_end]
        segments.append(GapSegment(
            gap_start=gap_start,
            gap_end=gap_end,
            seed_indices=tuple(range(gap_start - order, gap_start)),
            anchor_index=anchor_index,
            anchor_value=anchor_value,
        ))
    return prefix_length, segments


def write_csv(series: Series, imputed: Mapping[int, np.ndarray], precision: int = 6,
              origin: Mapping[int, str] | None = None) -> str:
    """Render the series with gaps filled, appending an ``origin`` column.

    Observed rows echo their original cells; rows listed in ``imputed`` get
    their value cells replaced by the imputed components printed with
    ``precision`` significant digits. ``imputed`` must cover exactly the
    missing positions.
    """
    if not 1 <= precision <= 17:
        raise ValueError("precision must be between 1 and 17")
    missing = set(series.missing_indices)
    given = set(imputed)
    if missing - given:
        raise DataError(f"imputed value missing for gap index {min(missing - given)}")
    if given - missing:
        raise DataError(f"imputed value supplied for observed index {min(given - missing)}")

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=series.delimiter, lineterminator="\n")
    writer.writerow(list(series.header) + ["origin"])
    for i, row in enumerate(series.rows, start=1):
        cells = list(row)
        if i in missing:
            vec = np.atleast_1d(np.asarray(imputed[i], dtype=float))
            if vec.shape[0] != series.dim:
                raise DataError(
                    f"imputed value at index {i} has {vec.shape[0]} components, "
                    f"expected {series.dim}"
                )
            for pos, c in enumerate(series.value_columns):
                cells[c] = format(vec[pos], f".{precision}g")
            tag = "imputed"
        else:
            tag = "observed"
        if origin is not None:
            tag = origin.get(i, tag)
        writer.writerow(cells + [tag])
    return buf.getvalue()
