"""Dense time series at hourly, daily or monthly resolution.

Periods are stored as integer ordinals so that alignment and density checks
are plain integer arithmetic:

* hourly  -- hours since 1970-01-01T00 UTC
* daily   -- ``datetime.date.toordinal()``
* monthly -- ``year * 12 + (month - 1)``
"""
from __future__ import annotations

import calendar
import csv
import io
import math
import re
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import AlignmentError, EmptyResultError, SeriesFormatError

HOURLY = "hourly"
DAILY = "daily"
MONTHLY = "monthly"
RESOLUTIONS = (HOURLY, DAILY, MONTHLY)

RAW_VIEWS = "raw_views"
TREND_INDEX = "trend_index"
UNITS = (RAW_VIEWS, TREND_INDEX)

MAX_TZ_OFFSET_MINUTES = 14 * 60

_EPOCH_DAY = date(1970, 1, 1).toordinal()
_HOURLY_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})T(\d{2})$")
_DAILY_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_MONTHLY_RE = re.compile(r"^(\d{4})-(\d{2})$")


def hour_ordinal(year: int, month: int, day: int, hour: int) -> int:
    if not 0 <= hour <= 23:
        raise ValueError(f"hour out of range: {hour}")
    return (date(year, month, day).toordinal() - _EPOCH_DAY) * 24 + hour


def hour_from_ordinal(ordinal: int) -> datetime:
    return datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(hours=ordinal)


def month_ordinal(year: int, month: int) -> int:
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    return year * 12 + month - 1


def month_from_ordinal(ordinal: int) -> tuple[int, int]:
    return ordinal // 12, ordinal % 12 + 1


def format_period(resolution: str, ordinal: int) -> str:
    if resolution == HOURLY:
        t = hour_from_ordinal(ordinal)
        return f"{t.year:04d}-{t.month:02d}-{t.day:02d}T{t.hour:02d}"
    if resolution == DAILY:
        return date.fromordinal(ordinal).isoformat()
    if resolution == MONTHLY:
        y, m = month_from_ordinal(ordinal)
        return f"{y:04d}-{m:02d}"
    raise ValueError(f"unknown resolution: {resolution!r}")


def parse_period(text: str) -> tuple[str, int]:
    """Parse ``YYYY-MM-DDTHH``, ``YYYY-MM-DD`` or ``YYYY-MM`` into (resolution, ordinal)."""
    text = text.strip()
    try:
        if m := _HOURLY_RE.match(text):
            return HOURLY, hour_ordinal(*map(int, m.groups()))
        if m := _DAILY_RE.match(text):
            return DAILY, date(*map(int, m.groups())).toordinal()
        if m := _MONTHLY_RE.match(text):
            return MONTHLY, month_ordinal(*map(int, m.groups()))
    except ValueError as exc:
        raise SeriesFormatError(f"invalid period {text!r}: {exc}") from None
    raise SeriesFormatError(f"unrecognized period {text!r}")


@dataclass(frozen=True)
class TimeSpan:
    resolution: str
    first: int
    last: int

    def __post_init__(self):
        if self.resolution not in RESOLUTIONS:
            raise ValueError(f"unknown resolution: {self.resolution!r}")
        if self.first > self.last:
            raise ValueError("span first > last")

    def __len__(self) -> int:
        return self.last - self.first + 1

    def __contains__(self, ordinal: object) -> bool:
        return isinstance(ordinal, int) and self.first <= ordinal <= self.last

    def __str__(self) -> str:
        return f"{format_period(self.resolution, self.first)}..{format_period(self.resolution, self.last)}"


@dataclass(frozen=True)
class TimeSeries:
    """Dense series: ``values[i]`` belongs to period ``start + i``."""

    resolution: str
    start: int
    values: tuple
    units: str = RAW_VIEWS

    def __post_init__(self):
        if self.resolution not in RESOLUTIONS:
            raise ValueError(f"unknown resolution: {self.resolution!r}")
        if self.units not in UNITS:
            raise ValueError(f"unknown units: {self.units!r}")
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ValueError("a time series needs at least one value")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0 or math.isinf(v):
                raise ValueError(f"series values must be finite and non-negative, got {v!r}")
        if self.units == TREND_INDEX:
            for v in values:
                if v != int(v) or not 0 <= v <= 100:
                    raise ValueError(f"trend index values must be integers in 0..100, got {v!r}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> int:
        return self.start + len(self.values) - 1

    @property
    def span(self) -> TimeSpan:
        return TimeSpan(self.resolution, self.start, self.end)

    @property
    def total(self):
        return sum(self.values)

    @property
    def all_zero(self) -> bool:
        return max(self.values) == 0

    def periods(self) -> list[str]:
        return [format_period(self.resolution, self.start + i) for i in range(len(self.values))]

    def window(self, span: TimeSpan) -> "TimeSeries":
        """Restrict to ``span``, which must lie inside this series."""
        if span.resolution != self.resolution:
            raise AlignmentError(f"cannot window {self.resolution} series with {span.resolution} span")
        if span.first < self.start or span.last > self.end:
            raise AlignmentError(f"span {span} not covered by series {self.span}")
        lo = span.first - self.start
        return TimeSeries(self.resolution, span.first, self.values[lo:lo + len(span)], self.units)


def _complete_groups(series: TimeSeries, key, expected) -> tuple[int, list]:
    """Sum runs of consecutive values sharing ``key(ordinal)``.

    Groups whose member count differs from ``expected(group)`` are partial and
    can only occur at the two edges of a dense series; they are dropped.
    """
    groups: list[list] = []  # [group, count, total]
    for i, v in enumerate(series.values):
        g = key(series.start + i)
        if groups and groups[-1][0] == g:
            groups[-1][1] += 1
            groups[-1][2] += v
        else:
            groups.append([g, 1, v])
    complete = [(g, total) for g, count, total in groups if count == expected(g)]
    if not complete:
        return 0, []
    return complete[0][0], [total for _, total in complete]


def hourly_to_daily(series: TimeSeries, tz_offset_minutes: int = 0) -> TimeSeries:
    """Sum hours into local calendar days, dropping incomplete edge days.

    Each hour is assigned to the day that contains its start after shifting by
    ``tz_offset_minutes`` (+540 for JST).
    """
    if series.resolution != HOURLY:
        raise ValueError(f"expected an hourly series, got {series.resolution}")
    if abs(tz_offset_minutes) > MAX_TZ_OFFSET_MINUTES:
        raise ValueError(f"tz offset out of range: {tz_offset_minutes} minutes")

    def local_day(h):
        return _EPOCH_DAY + (h * 60 + tz_offset_minutes) // 1440

    first, totals = _complete_groups(series, local_day, lambda _: 24)
    if not totals:
        raise EmptyResultError(f"no complete day in {series.span} at offset {tz_offset_minutes:+d} min")
    return TimeSeries(DAILY, first, totals, series.units)


def daily_to_monthly(series: TimeSeries) -> TimeSeries:
    """Sum days into calendar months, dropping incomplete edge months."""
    if series.resolution != DAILY:
        raise ValueError(f"expected a daily series, got {series.resolution}")

    def month_of(d):
        day = date.fromordinal(d)
        return month_ordinal(day.year, day.month)

    def month_length(m):
        return calendar.monthrange(*month_from_ordinal(m))[1]

    first, totals = _complete_groups(series, month_of, month_length)
    if not totals:
        raise EmptyResultError(f"no complete month in {series.span}")
    return TimeSeries(MONTHLY, first, totals, series.units)


def resample(series: TimeSeries, resolution: str, tz_offset_minutes: int = 0) -> TimeSeries:
    """Coarsen ``series`` to ``resolution`` (identity when already there)."""
    order = RESOLUTIONS.index
    if order(resolution) < order(series.resolution):
        raise ValueError(f"cannot refine {series.resolution} to {resolution}")
    if series.resolution == HOURLY and resolution != HOURLY:
        series = hourly_to_daily(series, tz_offset_minutes)
    if series.resolution == DAILY and resolution == MONTHLY:
        series = daily_to_monthly(series)
    return series


def common_span(a: TimeSeries, b: TimeSeries) -> TimeSpan:
    if a.resolution != b.resolution:
        raise AlignmentError(f"resolution mismatch: {a.resolution} vs {b.resolution}")
    first, last = max(a.start, b.start), min(a.end, b.end)
    if last - first + 1 < 2:
        if first > last:
            raise AlignmentError(f"spans {a.span} and {b.span} do not overlap")
        raise AlignmentError(f"spans {a.span} and {b.span} overlap in a single period")
    return TimeSpan(a.resolution, first, last)


def align(a: TimeSeries, b: TimeSeries) -> tuple[TimeSeries, TimeSeries]:
    """Trim both series to their common span (at least two periods)."""
    span = common_span(a, b)
    return a.window(span), b.window(span)


def trend_index(values: Sequence) -> list[int]:
    """Rescale to integer percentages of the maximum, rounding halves up.

    All-zero input maps to all zeros.
    """
    peak = max(values)
    if peak == 0:
        return [0] * len(values)
    peak = Fraction(peak)
    half = Fraction(1, 2)
    # exact rational arithmetic; values are non-negative so half-up == half-away-from-zero
    return [math.floor(100 * Fraction(v) / peak + half) for v in values]


def scale_to_trend_index(series: TimeSeries) -> TimeSeries:
    """Express ``series`` the way Google Trends does; check ``.all_zero`` for flat input."""
    return TimeSeries(series.resolution, series.start, trend_index(series.values), TREND_INDEX)


# -- CSV serialization ------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, int) or (isinstance(v, float) and v.is_integer()):
        return str(int(v))
    return repr(float(v))


def _parse_value(text: str, units: str):
    text = text.strip()
    if units == TREND_INDEX and text == "<1":
        # Google Trends marks "greater than zero but rounds to 0" this way
        return 0
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise SeriesFormatError(f"non-numeric value {text!r}") from None


def write_series(dest, series: TimeSeries, metadata: Mapping[str, object] | None = None) -> None:
    """Write ``period,value`` CSV, preceded by ``# key=value`` metadata lines."""
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}={value}\n")
    buf.write("period,value\n")
    for period, v in zip(series.periods(), series.values):
        buf.write(f"{period},{format_value(v)}\n")
    Path(dest).write_text(buf.getvalue(), encoding="utf-8", newline="")


def series_from_rows(rows: Iterable[tuple[str, str]], units: str = RAW_VIEWS, source: str = "<rows>") -> TimeSeries:
    resolution = None
    start = prev = None
    values = []
    for period_text, value_text in rows:
        res, ordinal = parse_period(period_text)
        if resolution is None:
            resolution, start = res, ordinal
        elif res != resolution:
            raise SeriesFormatError(f"{source}: mixed resolutions ({resolution} and {res})")
        elif ordinal != prev + 1:
            raise SeriesFormatError(
                f"{source}: series not dense at {period_text} (previous {format_period(resolution, prev)})")
        prev = ordinal
        values.append(_parse_value(value_text, units))
    if resolution is None:
        raise SeriesFormatError(f"{source}: no data rows")
    try:
        return TimeSeries(resolution, start, values, units)
    except ValueError as exc:
        raise SeriesFormatError(f"{source}: {exc}") from None


def read_series(path, units: str = RAW_VIEWS) -> TimeSeries:
    """Read a ``period,value`` CSV.

    Comment lines (``#``) and blank lines are ignored; the first remaining row
    is treated as a header unless it already starts with a period.
    """
    path = Path(path)
    with path.open(encoding="utf-8-sig", newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    rows = []
    for i, rec in enumerate(csv.reader(lines)):
        if len(rec) < 2:
            raise SeriesFormatError(f"{path}: row {i + 1} has fewer than two fields")
        if i == 0:
            try:
                parse_period(rec[0])
            except SeriesFormatError:
                continue
        rows.append((rec[0], rec[1]))
    return series_from_rows(rows, units, str(path))


def read_metadata(path) -> dict[str, str]:
    """Collect the leading ``# key=value`` lines of a file written by this package."""
    meta = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
    return meta
