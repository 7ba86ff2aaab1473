"""Per-keyword scoring and rank-bucket summaries.

Keywords are ranked by total page views.  Reports are then grouped into
buckets of consecutive access ranks (1-1000, 1001-2000, ...) and averaged.
Keywords whose Pearson coefficient is undefined (a constant series, typical
of low-volume search data that is almost all zeros) still contribute to the
UDCR mean but are left out of the Pearson mean; how many were left out is
reported next to every mean.
"""
from __future__ import annotations

import calendar
import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence

from .errors import AlignmentError, AnalysisError
from .metrics import score_pair
from .timeseries import DAILY, HOURLY, TimeSeries, TimeSpan, month_from_ordinal
from .titles import decode_title

SKIP_NO_VIEWS = "no_views"
SKIP_NO_REFERENCE = "no_reference"
SKIP_NO_OVERLAP = "no_overlap"

EXCLUSION_POLICY = "undefined pearson excluded from mean_pearson, included in mean_udcr"


@dataclass(frozen=True)
class RankedKeyword:
    title: str
    rank: int
    total_views: int | float


@dataclass(frozen=True)
class KeywordReport:
    keyword: str
    title: str
    access_rank: int
    total_views: int | float
    mean_daily_views: float
    n: int
    pearson: float | None
    udcr: float
    resolution: str


@dataclass(frozen=True)
class BucketSummary:
    rank_lo: int
    rank_hi: int
    keyword_count: int
    trend_data_count: int
    mean_pearson: float | None
    mean_udcr: float | None
    excluded_undefined_count: int


@dataclass(frozen=True)
class CoverageBucket:
    rank_lo: int
    rank_hi: int
    keyword_count: int
    trend_data_count: int


@dataclass(frozen=True)
class ThresholdSummary:
    threshold: float
    count: int
    boundary_rank: int | None
    mean_pearson: float | None
    mean_udcr: float | None
    excluded_undefined_count: int

    @property
    def empty(self) -> bool:
        return self.count == 0


@dataclass
class CorrelationResult:
    reports: list[KeywordReport]
    skipped: dict[str, str] = field(default_factory=dict)  # title -> reason

    @property
    def skip_counts(self) -> Counter:
        return Counter(self.skipped.values())

    @property
    def undefined_pearson_count(self) -> int:
        return sum(r.pearson is None for r in self.reports)


def _mean(values: Sequence[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def days_covered(series: TimeSeries) -> float:
    if series.resolution == HOURLY:
        return len(series) / 24
    if series.resolution == DAILY:
        return len(series)
    return sum(calendar.monthrange(*month_from_ordinal(series.start + i))[1] for i in range(len(series)))


def mean_daily_views(series: TimeSeries) -> float:
    return series.total / days_covered(series)


def rank_keywords(series: Mapping[str, TimeSeries], span: TimeSpan | None = None) -> list[RankedKeyword]:
    """Rank titles by total views, descending; equal totals fall back to title order.

    With ``span`` the totals cover only that window of each series.
    """
    if not series:
        raise AnalysisError("cannot rank an empty keyword collection")
    totals = {}
    for title, s in series.items():
        if span is not None:
            lo, hi = max(span.first, s.start), min(span.last, s.end)
            totals[title] = sum(s.values[lo - s.start:hi - s.start + 1]) if lo <= hi else 0
        else:
            totals[title] = s.total
    order = sorted(totals, key=lambda t: (-totals[t], t))
    return [RankedKeyword(t, i, totals[t]) for i, t in enumerate(order, start=1)]


def correlate_all(
    views: Mapping[str, TimeSeries],
    trends: Mapping[str, TimeSeries],
    resolution: str,
    *,
    keywords: Iterable[str] | None = None,
    ranking: Sequence[RankedKeyword] | None = None,
    daily_means: Mapping[str, float] | None = None,
    labels: Mapping[str, str] | None = None,
) -> CorrelationResult:
    """Score every keyword that has both a view series and a reference series.

    ``keywords`` defaults to the titles in ``views``.  Ranks come from
    ``ranking`` (or are computed from ``views``); mean daily views come from
    ``daily_means`` (or from the view series itself).  Keywords without views,
    without a reference series or without a two-period overlap are skipped
    and tallied in the result.
    """
    bad = sorted(
        t for t, s in [*views.items(), *trends.items()] if s.resolution != resolution
    )
    if bad:
        raise AnalysisError(f"series not at {resolution} resolution: {', '.join(bad)}")
    if ranking is None:
        ranking = rank_keywords(views)
    ranks = {r.title: r for r in ranking}
    titles = list(views) if keywords is None else list(keywords)

    reports, skipped = [], {}
    for title in titles:
        if title not in views or title not in ranks:
            skipped[title] = SKIP_NO_VIEWS
            continue
        if title not in trends:
            skipped[title] = SKIP_NO_REFERENCE
            continue
        try:
            m = score_pair(views[title], trends[title])
        except AlignmentError:
            skipped[title] = SKIP_NO_OVERLAP
            continue
        rk = ranks[title]
        mean_daily = daily_means[title] if daily_means is not None else mean_daily_views(views[title])
        label = labels.get(title) if labels else None
        reports.append(KeywordReport(
            label or decode_title(title), title, rk.rank, rk.total_views,
            mean_daily, m.n, m.pearson, m.udcr, resolution,
        ))
    if not reports:
        raise AnalysisError(f"zero resulting rows ({len(skipped)} keywords skipped)")
    reports.sort(key=lambda r: r.access_rank)
    return CorrelationResult(reports, skipped)


def _bucket_bounds(max_rank: int, bucket_size: int):
    if bucket_size < 1:
        raise ValueError("bucket_size must be >= 1")
    for lo in range(1, max_rank + 1, bucket_size):
        yield lo, min(lo + bucket_size - 1, max_rank)


def bucket_report(
    reports: Sequence[KeywordReport],
    bucket_size: int = 1000,
    *,
    total_ranked: int | None = None,
    coverage: Sequence[CoverageBucket] | None = None,
) -> list[BucketSummary]:
    """Average the metrics over consecutive blocks of ``bucket_size`` ranks.

    Buckets run up to the largest rank (or ``total_ranked``); the last one may
    be shorter.  ``trend_data_count`` comes from ``coverage`` when given,
    otherwise it equals the number of reports in the bucket.
    """
    if not reports:
        raise AnalysisError("no reports to bucket")
    if bucket_size < 1:
        raise ValueError("bucket_size must be >= 1")
    max_rank = max(max(r.access_rank for r in reports), total_ranked or 0)
    by_bucket: dict[int, list[KeywordReport]] = {}
    for r in reports:
        by_bucket.setdefault((r.access_rank - 1) // bucket_size, []).append(r)

    out = []
    for i, (lo, hi) in enumerate(_bucket_bounds(max_rank, bucket_size)):
        rows = by_bucket.get(i, [])
        defined = [r.pearson for r in rows if r.pearson is not None]
        trend_count = coverage[i].trend_data_count if coverage is not None else len(rows)
        out.append(BucketSummary(
            lo, hi, len(rows), trend_count,
            _mean(defined), _mean([r.udcr for r in rows]), len(rows) - len(defined),
        ))
    return out


def threshold_report(reports: Sequence[KeywordReport], min_mean_daily_views: float = 1000) -> ThresholdSummary:
    """Summarize keywords whose mean daily views are strictly above the threshold."""
    rows = [r for r in reports if r.mean_daily_views > min_mean_daily_views]
    defined = [r.pearson for r in rows if r.pearson is not None]
    return ThresholdSummary(
        min_mean_daily_views,
        len(rows),
        max((r.access_rank for r in rows), default=None),
        _mean(defined),
        _mean([r.udcr for r in rows]),
        len(rows) - len(defined),
    )


def coverage_report(ranking: Sequence[RankedKeyword], trends: Collection[str], bucket_size: int = 1000) -> list[CoverageBucket]:
    """Per rank bucket, how many keywords have a reference series at all."""
    if not ranking:
        return []
    max_rank = max(r.rank for r in ranking)
    counts = Counter()
    have = Counter()
    for r in ranking:
        b = (r.rank - 1) // bucket_size
        counts[b] += 1
        if r.title in trends:
            have[b] += 1
    return [
        CoverageBucket(lo, hi, counts[i], have[i])
        for i, (lo, hi) in enumerate(_bucket_bounds(max_rank, bucket_size))
    ]


# -- CSV output -------------------------------------------------------------

REPORT_HEADER = ["keyword", "rank", "total_views", "mean_daily_views", "n", "pearson", "udcr"]
BUCKET_HEADER = ["rank_lo", "rank_hi", "keyword_count", "trend_data_count", "mean_pearson", "mean_udcr", "excluded_undefined"]
COVERAGE_HEADER = ["rank_lo", "rank_hi", "keyword_count", "trend_data_count"]
THRESHOLD_HEADER = ["threshold", "count", "boundary_rank", "mean_pearson", "mean_udcr", "excluded_undefined"]


def fmt(v) -> str:
    """CSV cell: ``None`` is empty, integral numbers print without a fraction."""
    if v is None:
        return ""
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)
    return str(v)


def _write_csv(path, header, rows, metadata=None) -> None:
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}={value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def write_reports(path, reports: Iterable[KeywordReport], metadata=None) -> None:
    _write_csv(path, REPORT_HEADER, (
        (r.keyword, r.access_rank, r.total_views, r.mean_daily_views, r.n, r.pearson, r.udcr)
        for r in reports
    ), metadata)


def write_buckets(path, buckets: Iterable[BucketSummary], metadata=None) -> None:
    _write_csv(path, BUCKET_HEADER, (
        (b.rank_lo, b.rank_hi, b.keyword_count, b.trend_data_count, b.mean_pearson, b.mean_udcr,
         b.excluded_undefined_count)
        for b in buckets
    ), metadata)


def write_coverage(path, buckets: Iterable[CoverageBucket], metadata=None) -> None:
    _write_csv(path, COVERAGE_HEADER, (
        (b.rank_lo, b.rank_hi, b.keyword_count, b.trend_data_count) for b in buckets
    ), metadata)


def write_threshold(path, summary: ThresholdSummary, metadata=None) -> None:
    s = summary
    _write_csv(path, THRESHOLD_HEADER, [
        (s.threshold, s.count, s.boundary_rank, s.mean_pearson, s.mean_udcr, s.excluded_undefined_count)
    ], metadata)


def read_reports(path) -> list[dict[str, str]]:
    """Rows of a report CSV as dicts (metadata lines skipped)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
