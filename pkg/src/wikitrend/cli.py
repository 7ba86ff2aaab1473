"""Command-line interface: ``wikitrend {ingest,correlate,pairplot,top}``.

Stages talk to each other only through files:

    ingest     dumps + keyword list -> OUT/series/<title>.csv, OUT/ingest_stats.json
    correlate  series + reference CSVs -> report.csv, buckets.csv, coverage.csv, threshold.csv
    pairplot   one keyword -> aligned plot data with the two scores in a footer
    top        print keywords ranked by total views
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import (
    EXCLUSION_POLICY,
    bucket_report,
    correlate_all,
    coverage_report,
    mean_daily_views,
    rank_keywords,
    threshold_report,
    write_buckets,
    write_coverage,
    write_reports,
    write_threshold,
)
from .errors import SeriesFormatError, WikiTrendError
from .metrics import score_pair
from .pagecounts import ingest_directory
from .timeseries import (
    DAILY,
    HOURLY,
    MONTHLY,
    TREND_INDEX,
    TimeSpan,
    align,
    format_period,
    format_value,
    hourly_to_daily,
    parse_period,
    read_series,
    resample,
    scale_to_trend_index,
    write_series,
)
from .titles import decode_title, filename_to_title, load_keywords, normalize_keyword, title_to_filename

log = logging.getLogger("wikitrend")

SERIES_DIRNAME = "series"
STATS_FILENAME = "ingest_stats.json"


class CommandError(WikiTrendError):
    pass


@dataclass
class RunConfig:
    projects: list[str] = field(default_factory=lambda: ["ja"])
    keywords: Path | None = None
    dumps: Path | None = None
    span: TimeSpan | None = None
    tz_offset_minutes: int = 0
    resolution: str = DAILY
    bucket_size: int = 1000
    threshold: float = 1000.0
    out: Path = Path("out")
    jobs: int = 1
    timestamp: bool = True
    capitalize_first: bool = True
    series_dir: Path | None = None
    trends_dir: Path | None = None
    rank_span: TimeSpan | None = None

    def __post_init__(self):
        if self.bucket_size < 1:
            raise CommandError("--bucket-size must be >= 1")
        if self.resolution not in (DAILY, MONTHLY):
            raise CommandError("--resolution must be daily or monthly")
        if self.jobs < 1:
            raise CommandError("--jobs must be >= 1")

    @property
    def series_path(self) -> Path:
        return self.series_dir or self.out / SERIES_DIRNAME

    def metadata(self, command: str, **extra) -> dict[str, object]:
        meta: dict[str, object] = {"tool": f"wikitrend {__version__}", "command": command}
        if self.timestamp:
            meta["generated"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        meta.update(extra)
        return meta


# -- argument parsing -------------------------------------------------------

def _hour_arg(text: str, end: bool) -> int:
    res, ordinal = parse_period(text)
    if res == HOURLY:
        return ordinal
    if res == DAILY:
        d = date.fromordinal(ordinal)
        return parse_period(f"{d.isoformat()}T{23 if end else 0:02d}")[1]
    raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD or YYYY-MM-DDTHH, got {text!r}")


def _span(first: str | None, last: str | None, resolution: str) -> TimeSpan | None:
    if first is None and last is None:
        return None
    if first is None or last is None:
        raise CommandError("--from and --to must be given together")
    if resolution == HOURLY:
        return TimeSpan(HOURLY, _hour_arg(first, False), _hour_arg(last, True))
    lo, hi = parse_period(first), parse_period(last)
    if lo[0] != DAILY or hi[0] != DAILY:
        raise CommandError("ranking span must be given as YYYY-MM-DD dates")
    return TimeSpan(DAILY, lo[1], hi[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikitrend",
        description="Compare Wikipedia page views with search-trend series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the generation time so repeated runs are byte-identical")
    common.add_argument("--tz-offset-minutes", type=int, default=0,
                        help="local day boundary as minutes east of UTC (JST is 540; default 0)")
    common.add_argument("--no-capitalize", action="store_true",
                        help="do not uppercase the first letter of keywords")

    keywords = argparse.ArgumentParser(add_help=False)
    keywords.add_argument("--keywords", type=Path, required=True, help="keyword list, one per line")

    series = argparse.ArgumentParser(add_help=False)
    series.add_argument("--series", type=Path, help="ingested series directory (default: OUT/series)")

    trends = argparse.ArgumentParser(add_help=False)
    trends.add_argument("--trends", type=Path, required=True,
                        help="directory of reference CSVs named <encoded-title>.csv")
    trends.add_argument("--resolution", choices=[DAILY, MONTHLY], default=DAILY)

    p = sub.add_parser("ingest", parents=[common, keywords], help="build hourly series from pagecounts dumps")
    p.add_argument("--project", action="append", dest="projects",
                   help="project code to keep, exact match (repeat to add e.g. ja.m; default: ja)")
    p.add_argument("--dumps", type=Path, required=True, help="directory of pagecounts-YYYYMMDD-HH0000[.gz] files")
    p.add_argument("--from", dest="first", required=True, help="first hour, YYYY-MM-DD[THH] (UTC)")
    p.add_argument("--to", dest="last", required=True, help="last hour, YYYY-MM-DD[THH] (UTC, inclusive)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("correlate", parents=[common, keywords, series, trends],
                       help="score keywords against reference series and write the reports")
    p.add_argument("--bucket-size", type=int, default=1000)
    p.add_argument("--threshold", type=float, default=1000.0,
                   help="mean daily views a keyword must exceed for the threshold summary")
    p.add_argument("--rank-from", help="first day (YYYY-MM-DD) of the span used for ranking")
    p.add_argument("--rank-to", help="last day (YYYY-MM-DD) of the span used for ranking")

    p = sub.add_parser("pairplot", parents=[common, series, trends], help="write aligned plot data for one keyword")
    p.add_argument("keyword")

    p = sub.add_parser("top", parents=[common, series], help="print keywords ranked by total views")
    p.add_argument("-n", "--limit", type=int, default=20)
    p.add_argument("--rank-from")
    p.add_argument("--rank-to")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    span = None
    if args.command == "ingest":
        span = _span(args.first, args.last, HOURLY)
    rank_span = _span(getattr(args, "rank_from", None), getattr(args, "rank_to", None), DAILY)
    return RunConfig(
        projects=getattr(args, "projects", None) or ["ja"],
        keywords=getattr(args, "keywords", None),
        dumps=getattr(args, "dumps", None),
        span=span,
        tz_offset_minutes=args.tz_offset_minutes,
        resolution=getattr(args, "resolution", DAILY),
        bucket_size=getattr(args, "bucket_size", 1000),
        threshold=getattr(args, "threshold", 1000.0),
        out=args.out,
        jobs=getattr(args, "jobs", 1),
        timestamp=not args.no_timestamp,
        capitalize_first=not args.no_capitalize,
        series_dir=getattr(args, "series", None),
        trends_dir=getattr(args, "trends", None),
        rank_span=rank_span,
    )


# -- commands ---------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> int:
    index = load_keywords(cfg.keywords, cfg.capitalize_first)
    result = ingest_directory(cfg.dumps, cfg.span, cfg.projects, index.titles, jobs=cfg.jobs)

    series_dir = cfg.out / SERIES_DIRNAME
    series_dir.mkdir(parents=True, exist_ok=True)
    meta = cfg.metadata("ingest", project=",".join(cfg.projects), span=str(cfg.span))
    for kw in index.entries:
        title = kw.normalized_title
        if title not in result.matched_titles:
            continue
        write_series(series_dir / f"{title_to_filename(title)}.csv", result.series[title],
                     {**meta, "keyword": kw.raw, "title": title})

    unmatched = [kw.raw for kw in index.entries if kw.normalized_title not in result.matched_titles]
    stats = {
        "config": {
            "projects": cfg.projects,
            "keywords": str(cfg.keywords),
            "dumps": str(cfg.dumps),
            "from": format_period(HOURLY, cfg.span.first),
            "to": format_period(HOURLY, cfg.span.last),
            "capitalize_first": cfg.capitalize_first,
            "jobs": cfg.jobs,
        },
        "totals": result.stats.as_dict(),
        "keywords": len(index),
        "matched_keywords": len(index) - len(unmatched),
        "unmatched_keywords": unmatched,
        "duplicate_keywords": [[dup.raw, kept.raw] for dup, kept in index.duplicates],
        "hours_in_span": len(cfg.span),
        "missing_hours": [str(h) for h in result.missing_hours],
        "file_errors": [str(e) for e in result.errors],
        "warnings": result.warnings,
    }
    if cfg.timestamp:
        stats["generated"] = cfg.metadata("ingest")["generated"]
    (cfg.out / STATS_FILENAME).write_text(json.dumps(stats, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    print(f"ingested {result.stats.files_read} files, {result.stats.lines_total} lines; "
          f"{len(index) - len(unmatched)}/{len(index)} keywords matched; "
          f"{len(result.missing_hours)} missing hours -> {cfg.out}")
    if result.errors:
        print(f"warning: {len(result.errors)} unreadable files (see {STATS_FILENAME})", file=sys.stderr)
    return 0


def _series_file(directory: Path, title: str) -> Path:
    return directory / f"{title_to_filename(title)}.csv"


def _load_views(cfg: RunConfig, titles) -> dict:
    """Read ingested series for ``titles`` and bring them to daily resolution."""
    daily = {}
    for title in titles:
        path = _series_file(cfg.series_path, title)
        if not path.exists():
            continue
        s = read_series(path)
        daily[title] = hourly_to_daily(s, cfg.tz_offset_minutes) if s.resolution == HOURLY else s
    return daily


def _load_trends(cfg: RunConfig, titles) -> dict:
    trends, mismatched = {}, []
    for title in titles:
        path = _series_file(cfg.trends_dir, title)
        if not path.exists():
            continue
        s = read_series(path, units=TREND_INDEX)
        if s.resolution != cfg.resolution:
            mismatched.append(f"{path} ({s.resolution})")
            continue
        trends[title] = s
    if mismatched:
        raise CommandError(f"reference series are not {cfg.resolution}: " + ", ".join(mismatched))
    return trends


def cmd_correlate(cfg: RunConfig) -> int:
    if not cfg.trends_dir.is_dir():
        raise CommandError(f"trends directory not found: {cfg.trends_dir}")
    if not cfg.series_path.is_dir():
        raise CommandError(f"series directory not found: {cfg.series_path}")
    index = load_keywords(cfg.keywords, cfg.capitalize_first)
    titles = [kw.normalized_title for kw in index.entries]
    labels = {kw.normalized_title: kw.raw for kw in index.entries}

    daily = _load_views(cfg, titles)
    if not daily:
        raise CommandError(f"no ingested series for any keyword in {cfg.series_path}")
    ranking = rank_keywords(daily, cfg.rank_span)
    daily_means = {t: mean_daily_views(s) for t, s in daily.items()}
    views = {t: resample(s, cfg.resolution) for t, s in daily.items()}
    trends = _load_trends(cfg, titles)

    result = correlate_all(views, trends, cfg.resolution, keywords=titles, ranking=ranking,
                           daily_means=daily_means, labels=labels)
    coverage = coverage_report(ranking, trends, cfg.bucket_size)
    buckets = bucket_report(result.reports, cfg.bucket_size, total_ranked=len(ranking), coverage=coverage)
    summary = threshold_report(result.reports, cfg.threshold)

    skips = result.skip_counts
    meta = cfg.metadata(
        "correlate",
        resolution=cfg.resolution,
        tz_offset_minutes=cfg.tz_offset_minutes,
        bucket_size=cfg.bucket_size,
        threshold=format_value(cfg.threshold),
        rank_span=str(cfg.rank_span) if cfg.rank_span else "full series",
        exclusion_policy=EXCLUSION_POLICY,
        keywords=len(index),
        ranked=len(ranking),
        reports=len(result.reports),
        undefined_pearson=result.undefined_pearson_count,
        skipped=",".join(f"{k}:{skips[k]}" for k in sorted(skips)) or "none",
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_reports(cfg.out / "report.csv", result.reports, meta)
    write_buckets(cfg.out / "buckets.csv", buckets, meta)
    write_coverage(cfg.out / "coverage.csv", coverage, meta)
    write_threshold(cfg.out / "threshold.csv", summary, meta)

    print(f"{len(result.reports)} keywords scored ({cfg.resolution}), "
          f"{len(result.skipped)} skipped, {result.undefined_pearson_count} with undefined pearson")
    mp = "n/a" if summary.mean_pearson is None else f"{summary.mean_pearson:.4f}"
    mu = "n/a" if summary.mean_udcr is None else f"{summary.mean_udcr:.4f}"
    print(f"threshold > {format_value(cfg.threshold)} views/day: {summary.count} keywords "
          f"(rank <= {summary.boundary_rank}), mean pearson {mp}, mean udcr {mu}")
    return 0


def cmd_pairplot(cfg: RunConfig, keyword: str) -> int:
    title = normalize_keyword(keyword, cfg.capitalize_first)
    views_path = _series_file(cfg.series_path, title)
    trend_path = _series_file(cfg.trends_dir, title)
    for path in (views_path, trend_path):
        if not path.exists():
            raise CommandError(f"no series for {keyword!r}: {path} not found")
    raw = read_series(views_path)
    views = hourly_to_daily(raw, cfg.tz_offset_minutes) if raw.resolution == HOURLY else raw
    views = resample(views, cfg.resolution)
    trend = read_series(trend_path, units=TREND_INDEX)
    if trend.resolution != cfg.resolution:
        raise CommandError(f"{trend_path} is {trend.resolution}, expected {cfg.resolution}")

    metrics = score_pair(views, trend)
    v, t = align(views, trend)
    scaled = scale_to_trend_index(v)

    lines = [f"# {k}={val}" for k, val in cfg.metadata(
        "pairplot", keyword=keyword, title=title, resolution=cfg.resolution,
        tz_offset_minutes=cfg.tz_offset_minutes).items()]
    lines.append("period,views_scaled,trend")
    lines += [f"{p},{a},{format_value(b)}" for p, a, b in zip(v.periods(), scaled.values, t.values)]
    lines.append(f"# n={metrics.n}")
    lines.append(f"# pearson={'' if metrics.pearson is None else repr(metrics.pearson)}")
    lines.append(f"# udcr={metrics.udcr!r}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    dest = cfg.out / f"pairplot-{title_to_filename(title)}.csv"
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")
    pr = "undefined" if metrics.pearson is None else f"{metrics.pearson:.4f}"
    print(f"{decode_title(title)}: n={metrics.n} pearson={pr} udcr={metrics.udcr:.4f} -> {dest}")
    return 0


def cmd_top(cfg: RunConfig, limit: int) -> int:
    directory = cfg.series_path
    if not directory.is_dir():
        raise CommandError(f"series directory not found: {directory}")
    daily = {}
    for path in sorted(directory.glob("*.csv")):
        s = read_series(path)
        daily[filename_to_title(path.stem)] = hourly_to_daily(s, cfg.tz_offset_minutes) if s.resolution == HOURLY else s
    if not daily:
        raise CommandError(f"no series files in {directory}")
    for r in rank_keywords(daily, cfg.rank_span)[:limit]:
        print(f"{r.rank}\t{decode_title(r.title)}\t{format_value(r.total_views)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "correlate":
            return cmd_correlate(cfg)
        if args.command == "pairplot":
            return cmd_pairplot(cfg, args.keyword)
        return cmd_top(cfg, args.limit)
    except (WikiTrendError, SeriesFormatError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"wikitrend {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
