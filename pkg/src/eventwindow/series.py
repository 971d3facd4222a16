"""Daily observation series: CSV ingestion, masking, segmentation, log returns.

The raw record is a date-indexed series of strictly positive daily values with
a per-index missing mask.  Missing observations are excluded from every
downstream computation, never imputed, and a missing day breaks the log-return
chain (no return spans a gap).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import (
    DuplicateDateError,
    EventOutsideRangeError,
    InsufficientDataError,
    MalformedRowError,
    ZeroMADError,
)


@dataclass(frozen=True)
class ObservationSeries:
    """Date-indexed daily values; ``values[i]`` is NaN wherever ``missing_mask[i]``."""

    dates: tuple[Date, ...]
    values: np.ndarray
    missing_mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.missing_mask, dtype=bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing_mask", mask)
        if not (len(self.dates) == len(values) == len(mask)):
            raise ValueError("dates, values and missing_mask must have equal length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"dates must be strictly increasing ({prev} -> {cur})")
        observed = values[~mask]
        if observed.size and (not np.all(np.isfinite(observed)) or np.any(observed <= 0)):
            raise ValueError("non-missing values must be finite and > 0")
        values.setflags(write=False)
        mask.setflags(write=False)

    def __len__(self) -> int:
        return len(self.dates)

    def observed(self) -> np.ndarray:
        """Values with the masked entries dropped."""
        return self.values[~self.missing_mask]

    def observed_dates(self) -> tuple[Date, ...]:
        return tuple(d for d, m in zip(self.dates, self.missing_mask) if not m)

    def restrict(self, start: Date | None = None, end: Date | None = None) -> "ObservationSeries":
        """Sub-series with dates in [start, end] (either bound optional)."""
        keep = [
            i
            for i, d in enumerate(self.dates)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        return ObservationSeries(
            dates=tuple(self.dates[i] for i in keep),
            values=self.values[keep],
            missing_mask=self.missing_mask[keep],
        )


@dataclass(frozen=True)
class SegmentedSeries:
    """Exhaustive pre/post partition of a series around an event date.

    The event date itself belongs to the post segment.
    """

    pre: ObservationSeries
    post: ObservationSeries
    full: ObservationSeries
    event_date: Date

    def __post_init__(self):
        if len(self.pre) + len(self.post) != len(self.full):
            raise ValueError("pre/post segments must partition the full series")
        if self.pre.dates and max(self.pre.dates) >= self.event_date:
            raise ValueError("pre segment contains dates on/after the event")
        if self.post.dates and min(self.post.dates) < self.event_date:
            raise ValueError("post segment contains dates before the event")


@dataclass(frozen=True)
class ReturnSeries:
    """One-step log returns; each return is dated by the later observation."""

    dates: tuple[Date, ...]
    log_returns: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.log_returns, dtype=float)
        object.__setattr__(self, "log_returns", arr)
        if len(self.dates) != len(arr):
            raise ValueError("dates and log_returns must have equal length")
        arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.dates)


def load_csv(
    path: str | Path,
    value_column: str = "value",
    date_column: str = "date",
) -> ObservationSeries:
    """Load a daily series from a headered CSV file.

    Dates must be ISO-8601; value cells that are empty or do not parse as a
    finite number become masked entries (they are kept, not dropped).  Rows
    are sorted by date; duplicate dates are rejected.

    Raises:
        FileNotFoundError: the file does not exist.
        MalformedRowError: header or row cannot be parsed (carries the line number).
        DuplicateDateError: the same date appears twice.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))

    rows: list[tuple[Date, float, bool]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError(1, "empty file (header row required)") from None
        header = [h.strip() for h in header]
        try:
            date_idx = header.index(date_column)
            value_idx = header.index(value_column)
        except ValueError:
            raise MalformedRowError(
                1, f"missing required column(s) {date_column!r}/{value_column!r} in {header}"
            ) from None

        seen: set[Date] = set()
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(date_idx, value_idx):
                raise MalformedRowError(line_no, f"expected {len(header)} fields, got {len(row)}")
            raw_date = row[date_idx].strip()
            try:
                d = Date.fromisoformat(raw_date)
            except ValueError:
                raise MalformedRowError(line_no, f"unparseable date {raw_date!r}") from None
            if d in seen:
                raise DuplicateDateError(d)
            seen.add(d)

            raw_value = row[value_idx].strip()
            missing = False
            value = math.nan
            if raw_value:
                try:
                    value = float(raw_value)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    value = math.nan
            if math.isnan(value):
                missing = True
            elif value <= 0:
                raise MalformedRowError(line_no, f"non-positive value {raw_value!r}")
            rows.append((d, value, missing))

    if not rows:
        raise MalformedRowError(2, "no data rows")
    rows.sort(key=lambda r: r[0])
    return ObservationSeries(
        dates=tuple(r[0] for r in rows),
        values=np.array([r[1] for r in rows], dtype=float),
        missing_mask=np.array([r[2] for r in rows], dtype=bool),
    )


def save_csv(
    series: ObservationSeries,
    path: str | Path,
    value_column: str = "value",
    date_column: str = "date",
) -> None:
    """Write a series at full float precision; masked entries get empty cells.

    ``load_csv(save_csv(s))`` round-trips values bit-exactly.
    """
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([date_column, value_column])
        for d, v, m in zip(series.dates, series.values, series.missing_mask):
            writer.writerow([d.isoformat(), "" if m else repr(float(v))])


def segment(series: ObservationSeries, event_date: Date) -> SegmentedSeries:
    """Split a series into pre (< event) and post (>= event) segments.

    Raises:
        EventOutsideRangeError: either segment would be empty.
    """
    if not series.dates:
        raise EventOutsideRangeError("cannot segment an empty series")
    pre_idx = [i for i, d in enumerate(series.dates) if d < event_date]
    post_idx = [i for i, d in enumerate(series.dates) if d >= event_date]
    if not pre_idx or not post_idx:
        raise EventOutsideRangeError(
            f"event {event_date.isoformat()} must lie strictly inside "
            f"({series.dates[0].isoformat()}, {series.dates[-1].isoformat()}]"
        )

    def _take(idx: list[int]) -> ObservationSeries:
        return ObservationSeries(
            dates=tuple(series.dates[i] for i in idx),
            values=series.values[idx],
            missing_mask=series.missing_mask[idx],
        )

    return SegmentedSeries(pre=_take(pre_idx), post=_take(post_idx), full=series, event_date=event_date)


def log_returns(series: ObservationSeries) -> ReturnSeries:
    """Log returns over consecutive non-missing observations.

    A masked observation breaks the chain: no return spans a gap, so each
    return is a one-trading-step quantity.

    Raises:
        InsufficientDataError: fewer than two non-missing observations.
    """
    if int(np.count_nonzero(~series.missing_mask)) < 2:
        raise InsufficientDataError("log returns need at least 2 non-missing observations")
    dates: list[Date] = []
    rets: list[float] = []
    for i in range(1, len(series)):
        if series.missing_mask[i] or series.missing_mask[i - 1]:
            continue
        dates.append(series.dates[i])
        rets.append(math.log(series.values[i] / series.values[i - 1]))
    return ReturnSeries(dates=tuple(dates), log_returns=np.array(rets, dtype=float))


def modified_z_flags(
    series: ObservationSeries, threshold: float = 3.5
) -> list[tuple[Date, float, bool]]:
    """Robust per-observation outlier flags via 0.6745 * (x - median) / MAD.

    Flagged observations are retained, never removed.

    Raises:
        InsufficientDataError: fewer than 3 non-missing observations.
        ZeroMADError: MAD is zero (constant series); caller must fall back.
    """
    observed = series.observed()
    if observed.size < 3:
        raise InsufficientDataError("modified z-scores need at least 3 non-missing values")
    med = float(np.median(observed))
    mad = float(np.median(np.abs(observed - med)))
    if mad == 0.0:
        raise ZeroMADError("MAD is zero; modified z-scores undefined")
    out: list[tuple[Date, float, bool]] = []
    for d, v, m in zip(series.dates, series.values, series.missing_mask):
        if m:
            continue
        z = 0.6745 * (v - med) / mad
        out.append((d, float(z), abs(z) > threshold))
    return out


class DataProvider(Protocol):
    """Pluggable source of daily observation series."""

    def fetch(self, symbol: str, start: Date, end: Date) -> ObservationSeries: ...


class CsvProvider:
    """The one shipped provider: reads a local CSV and filters by date range.

    The symbol argument is accepted for interface compatibility and ignored.
    """

    def __init__(self, path: str | Path, date_column: str = "date", value_column: str = "value"):
        self.path = Path(path)
        self.date_column = date_column
        self.value_column = value_column

    def fetch(self, symbol: str, start: Date, end: Date) -> ObservationSeries:
        series = load_csv(self.path, value_column=self.value_column, date_column=self.date_column)
        return series.restrict(start, end)
