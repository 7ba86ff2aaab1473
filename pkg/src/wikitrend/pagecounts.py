"""Streaming reader for Wikimedia ``pagecounts-raw`` hourly dumps.

Every dump line is ``<project> <encoded-title> <count> <bytes>``.  A file
named ``pagecounts-YYYYMMDD-HH0000[.gz]`` is taken to cover the UTC hour that
*starts* at the time in its name.
"""
from __future__ import annotations

import gzip
import logging
import os
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import date
from pathlib import Path
from typing import Collection, Iterable

from .errors import FilenameError, IngestError
from .timeseries import HOURLY, RAW_VIEWS, TimeSeries, TimeSpan, hour_from_ordinal, hour_ordinal

log = logging.getLogger(__name__)

_FILENAME_RE = re.compile(r"^pagecounts-(\d{4})(\d{2})(\d{2})-(\d{2})0000(?:\.gz)?$")
_GZIP_MAGIC = b"\x1f\x8b"


@dataclass(frozen=True)
class PagecountRecord:
    project: str
    title: str  # still percent-encoded, as in the dump
    views: int
    bytes: int


@dataclass(frozen=True, order=True)
class HourStamp:
    year: int
    month: int
    day: int
    hour: int

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")
        date(self.year, self.month, self.day)

    @property
    def ordinal(self) -> int:
        return hour_ordinal(self.year, self.month, self.day, self.hour)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "HourStamp":
        t = hour_from_ordinal(ordinal)
        return cls(t.year, t.month, t.day, t.hour)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}T{self.hour:02d}"


@dataclass
class IngestStats:
    files_read: int = 0
    lines_total: int = 0
    lines_matched: int = 0
    lines_malformed: int = 0
    lines_other_project: int = 0

    @property
    def lines_unmatched_title(self) -> int:
        return self.lines_total - self.lines_matched - self.lines_malformed - self.lines_other_project

    def merge(self, other: "IngestStats") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict[str, int]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["lines_unmatched_title"] = self.lines_unmatched_title
        return d


def _split(line: bytes):
    """Return ``(project, title, views, bytes)`` or ``None`` for a malformed line."""
    parts = line.rstrip(b"\r\n").split(b" ")
    if len(parts) != 4:
        return None
    project, title, count, size = parts
    if not project or not title or not count.isdigit() or not size.isdigit():
        return None
    return project, title, int(count), int(size)


def parse_line(line: str | bytes) -> PagecountRecord | None:
    """Parse one dump line; ``None`` marks it malformed."""
    if isinstance(line, str):
        line = line.encode("utf-8", "surrogateescape")
    parts = _split(line)
    if parts is None:
        return None
    project, title, views, size = parts
    return PagecountRecord(
        project.decode("utf-8", "surrogateescape"),
        title.decode("utf-8", "surrogateescape"),
        views,
        size,
    )


def hourstamp_from_filename(name: str) -> HourStamp:
    """UTC hour covered by a dump file, from its base name."""
    m = _FILENAME_RE.match(os.path.basename(name))
    if not m:
        raise FilenameError(f"not a pagecounts dump file name: {name}")
    try:
        return HourStamp(*map(int, m.groups()))
    except ValueError as exc:
        raise FilenameError(f"invalid date in {name}: {exc}") from None


def _as_bytes_set(items: Iterable[str]) -> frozenset[bytes]:
    return frozenset(s.encode("utf-8", "surrogateescape") for s in items)


def ingest_lines(lines: Iterable[bytes], projects: Collection[str], titles: Collection[str]):
    """Sum views per title over raw dump lines.

    Returns ``(counts, stats)``; ``counts`` has an entry for every filtered
    title that appeared at least once, even with zero views.
    """
    want_projects = _as_bytes_set(projects)
    want_titles = _as_bytes_set(titles)
    counts: dict[bytes, int] = {}
    total = matched = malformed = other = 0
    split = _split
    for line in lines:
        total += 1
        parts = split(line)
        if parts is None:
            malformed += 1
            continue
        if parts[0] not in want_projects:
            other += 1
            continue
        title = parts[1]
        if title in want_titles:
            matched += 1
            counts[title] = counts.get(title, 0) + parts[2]
    stats = IngestStats(0, total, matched, malformed, other)
    return {t.decode("utf-8", "surrogateescape"): v for t, v in counts.items()}, stats


def _open(path: Path):
    fh = open(path, "rb")
    if fh.read(2) == _GZIP_MAGIC:
        fh.close()
        return gzip.open(path, "rb")
    fh.seek(0)
    return fh


def ingest_file(path, project_filter: str | Collection[str], title_filter: Collection[str]):
    """Per-title view sums for one dump file, plus its :class:`IngestStats`.

    Gzip is detected from the magic bytes, not the suffix.  Any read or
    decompression failure raises :class:`IngestError` for the whole file.
    """
    if not title_filter:
        raise ValueError("title_filter must not be empty")
    projects = {project_filter} if isinstance(project_filter, str) else set(project_filter)
    path = Path(path)
    try:
        with _open(path) as fh:
            counts, stats = ingest_lines(fh, projects, title_filter)
    except (OSError, EOFError, zlib.error) as exc:
        raise IngestError(path, f"{type(exc).__name__}: {exc}") from exc
    stats.files_read = 1
    return counts, stats


@dataclass
class IngestResult:
    span: TimeSpan
    series: dict[str, TimeSeries]
    stats: IngestStats
    missing_hours: list[HourStamp] = field(default_factory=list)
    matched_titles: frozenset[str] = frozenset()
    errors: list[IngestError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _ingest_task(args):
    path, projects, titles = args
    try:
        counts, stats = ingest_file(path, projects, titles)
    except IngestError as exc:
        return path, None, None, str(exc)
    return path, counts, stats, None


def list_dump_files(directory, span: TimeSpan | None = None):
    """Dump files in ``directory`` as ``(HourStamp, path)`` pairs sorted by hour and name.

    Returns ``(files, warnings)``; names that do not parse become warnings.
    """
    files, warnings = [], []
    for entry in sorted(Path(directory).iterdir()):
        if not entry.is_file():
            continue
        try:
            stamp = hourstamp_from_filename(entry.name)
        except FilenameError as exc:
            warnings.append(f"skipped {entry}: {exc}")
            continue
        if span is not None and stamp.ordinal not in span:
            continue
        files.append((stamp, entry))
    return files, warnings


def ingest_directory(directory, span: TimeSpan, project_filter, title_filter: Collection[str], jobs: int = 1) -> IngestResult:
    """Build a dense hourly series per title over ``span``.

    Hours without a dump file are zero-filled and listed in
    ``missing_hours``.  Partial counts are merged by summation, so the
    result does not depend on file order or on ``jobs``.  Unreadable files
    are collected in ``errors``; only when no file could be read at all is
    :class:`IngestError` raised.
    """
    if span.resolution != HOURLY:
        raise ValueError("ingest span must be hourly")
    if not title_filter:
        raise ValueError("title_filter must not be empty")
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestError(directory, "not a directory")
    projects = frozenset([project_filter] if isinstance(project_filter, str) else project_filter)
    titles = frozenset(title_filter)

    files, warnings = list_dump_files(directory, span)
    for w in warnings:
        log.warning(w)
    tasks = [(path, projects, titles) for _, path in files]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_ingest_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        outcomes = [_ingest_task(t) for t in tasks]

    hourly = {t: [0] * len(span) for t in titles}
    stats = IngestStats()
    errors = []
    seen_hours = set()
    matched = set()
    for (stamp, _), (path, counts, file_stats, err) in zip(files, outcomes):
        if err is not None:
            log.error(err)
            errors.append(IngestError(path, err))
            continue
        stats.merge(file_stats)
        seen_hours.add(stamp.ordinal)
        slot = stamp.ordinal - span.first
        for title, views in counts.items():
            hourly[title][slot] += views
            matched.add(title)

    if stats.files_read == 0:
        detail = f"{len(errors)} unreadable" if errors else "none found"
        raise IngestError(directory, f"no readable pagecounts files for {span} ({detail})")

    missing = [HourStamp.from_ordinal(h) for h in range(span.first, span.last + 1) if h not in seen_hours]
    series = {t: TimeSeries(HOURLY, span.first, v, RAW_VIEWS) for t, v in sorted(hourly.items())}
    return IngestResult(span, series, stats, missing, frozenset(matched), errors, warnings)
