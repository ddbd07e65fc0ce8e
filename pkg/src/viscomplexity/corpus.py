"""Album metadata handling: ingest, dedupe, genre mapping, periods, stats.

Metadata arrives as a UTF-8 CSV with RFC-4180 quoting and the columns
album_id, artist, title, year, raw_genres, image_ref, source. Raw genre
cells hold zero or more labels separated by "|". Rows without a year are
dropped and counted; malformed rows are collected as RowError diagnostics
and skipped rather than aborting the load.

Downstream steps map raw labels onto the fixed 11-genre target set, fill
still-unlabeled records from an imputation file, bin records into dynamic
periods of at least a threshold number of albums, and reduce joined
(record, value) pairs into per-group summary statistics.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpus, RowError, SchemaError, UnknownSupergenre

SUPERGENRES = (
    "Classical",
    "Country & Folk",
    "Electronic",
    "Hip Hop",
    "Jazz & Blues",
    "Metal",
    "Pop",
    "R&B",
    "Rock",
    "Speciality",
    "World Music",
)

SOURCES = ("MuMu", "MSD-I", "Billboard", "Other")
DEFAULT_SOURCE_PRIORITY = SOURCES

DISCARD = "DISCARD"
DEFAULT_BIN_THRESHOLD = 3000
DEFAULT_MIN_GENRE_COUNT = 50

_REQUIRED_COLUMNS = ("album_id", "artist", "title", "year", "raw_genres", "image_ref", "source")

_SUPERGENRE_SET = frozenset(SUPERGENRES)


@dataclass
class AlbumRecord:
    album_id: str
    artist: str
    title: str
    year: int
    raw_genres: tuple[str, ...]
    image_ref: str
    source: str
    supergenres: frozenset[str] = frozenset()


@dataclass
class CleaningReport:
    """What ingest dropped: dateless rows plus per-row diagnostics."""

    missing_date: int = 0
    row_errors: list[RowError] = field(default_factory=list)


@dataclass
class MappingReport:
    """Labels the genre map does not cover and records left without genres."""

    unmapped: Counter = field(default_factory=Counter)
    unlabeled: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Period:
    start_year: int
    end_year: int
    album_count: int

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    @property
    def label(self) -> str:
        if self.start_year == self.end_year:
            return str(self.start_year)
        return f"{self.start_year}-{self.end_year}"


@dataclass(frozen=True)
class AggregateStats:
    period: Period
    genre: str | None
    n: int
    mean: float
    se: float
    median: float
    q1: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


@dataclass(frozen=True)
class TrajectoryPoint:
    period: Period
    n: int
    mean_h: float
    mean_c: float
    se_h: float
    se_c: float


def ingest_metadata(path) -> tuple[list[AlbumRecord], CleaningReport]:
    """Parse the metadata CSV; bad rows are reported, not fatal."""
    report = CleaningReport()
    records: list[AlbumRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"metadata is missing column(s): {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=2):
            rec = _parse_row(row, row_no, report)
            if rec is not None:
                records.append(rec)
    return records, report


def _parse_row(row: dict, row_no: int, report: CleaningReport) -> AlbumRecord | None:
    album_id = (row.get("album_id") or "").strip()
    if not album_id:
        report.row_errors.append(RowError(row_no, "empty album_id"))
        return None
    source = (row.get("source") or "").strip()
    if source not in SOURCES:
        report.row_errors.append(RowError(row_no, f"unknown source {source!r}"))
        return None
    year_cell = (row.get("year") or "").strip()
    if not year_cell:
        report.missing_date += 1
        return None
    try:
        year = int(year_cell)
    except ValueError:
        report.row_errors.append(RowError(row_no, f"bad year {year_cell!r}"))
        return None
    raw_cell = (row.get("raw_genres") or "").strip()
    raw_genres = tuple(g.strip() for g in raw_cell.split("|") if g.strip()) if raw_cell else ()
    return AlbumRecord(
        album_id=album_id,
        artist=row.get("artist") or "",
        title=row.get("title") or "",
        year=year,
        raw_genres=raw_genres,
        image_ref=(row.get("image_ref") or "").strip(),
        source=source,
    )


def _normalize(s: str) -> str:
    return " ".join(s.split()).casefold()


def dedupe(
    records: list[AlbumRecord],
    priority: tuple[str, ...] = DEFAULT_SOURCE_PRIORITY,
) -> list[AlbumRecord]:
    """Collapse id collisions, then artist/title collisions, then sort.

    Both collision passes keep the highest-priority source, first seen on a
    tie, so the whole function is idempotent.
    """
    rank = {src: i for i, src in enumerate(priority)}

    by_id: dict[str, AlbumRecord] = {}
    for rec in records:
        held = by_id.get(rec.album_id)
        if held is None or rank[rec.source] < rank[held.source]:
            by_id[rec.album_id] = rec

    by_pair: dict[tuple[str, str], AlbumRecord] = {}
    for rec in by_id.values():
        key = (_normalize(rec.artist), _normalize(rec.title))
        held = by_pair.get(key)
        if held is None or rank[rec.source] < rank[held.source]:
            by_pair[key] = rec

    return sorted(by_pair.values(), key=lambda r: (r.year, r.album_id))


def load_genre_map(path) -> dict[str, tuple[str, ...] | str]:
    """CSV raw_label,supergenres with "|"-separated targets or DISCARD."""
    gm: dict[str, tuple[str, ...] | str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "raw_label" not in header or "supergenres" not in header:
            raise SchemaError("genre map needs columns raw_label, supergenres")
        for row in reader:
            raw = (row.get("raw_label") or "").strip()
            cell = (row.get("supergenres") or "").strip()
            if not raw:
                continue
            if cell == DISCARD:
                gm[raw] = DISCARD
                continue
            targets = tuple(t.strip() for t in cell.split("|") if t.strip())
            bad = [t for t in targets if t not in _SUPERGENRE_SET]
            if bad or not targets:
                raise UnknownSupergenre(f"genre map entry {raw!r} maps to {cell!r}")
            gm[raw] = targets
    return gm


def map_genres(
    records: list[AlbumRecord], gm: dict[str, tuple[str, ...] | str]
) -> tuple[list[AlbumRecord], MappingReport]:
    """Populate supergenres as the union of mapped raw labels.

    Labels absent from the map are tallied in the report; records whose
    final set is empty are listed as unlabeled for later imputation.
    """
    report = MappingReport()
    out: list[AlbumRecord] = []
    for rec in records:
        genres: set[str] = set()
        for raw in rec.raw_genres:
            entry = gm.get(raw)
            if entry is None:
                report.unmapped[raw] += 1
            elif entry != DISCARD:
                genres.update(entry)
        if not genres:
            report.unlabeled.append(rec.album_id)
        rec.supergenres = frozenset(genres)
        out.append(rec)
    return out, report


def load_imputation(path) -> list[tuple[str, str, bool]]:
    """CSV album_id,genre,sure; genre must be one of the 11 targets."""
    rows: list[tuple[str, str, bool]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("album_id", "genre", "sure") if c not in header]
        if missing:
            raise SchemaError(f"imputation file is missing column(s): {', '.join(missing)}")
        for row in reader:
            genre = (row.get("genre") or "").strip()
            if genre not in _SUPERGENRE_SET:
                raise UnknownSupergenre(f"imputed genre {genre!r}")
            sure = (row.get("sure") or "").strip().casefold() in ("true", "1", "yes")
            rows.append(((row.get("album_id") or "").strip(), genre, sure))
    return rows


def apply_imputation(
    records: list[AlbumRecord], imputed: list[tuple[str, str, bool]]
) -> list[AlbumRecord]:
    """Fill empty supergenre sets from high-confidence rows, never overwrite."""
    fills: dict[str, set[str]] = {}
    for album_id, genre, sure in imputed:
        if sure:
            fills.setdefault(album_id, set()).add(genre)
    for rec in records:
        if not rec.supergenres and rec.album_id in fills:
            rec.supergenres = frozenset(fills[rec.album_id])
    return records


def bin_periods(records: list[AlbumRecord], threshold: int = DEFAULT_BIN_THRESHOLD) -> list[Period]:
    """Partition the year range into periods of at least threshold albums.

    Whole years accumulate until the running count reaches the threshold;
    the final period keeps whatever remains. Years are never split.
    """
    if not records:
        raise EmptyCorpus("no records to bin")
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    counts = Counter(rec.year for rec in records)
    first, last = min(counts), max(counts)

    periods: list[Period] = []
    start = first
    acc = 0
    for year in range(first, last + 1):
        acc += counts.get(year, 0)
        if acc >= threshold:
            periods.append(Period(start, year, acc))
            start = year + 1
            acc = 0
    if start <= last:
        periods.append(Period(start, last, acc))
    return periods


def find_period(periods: list[Period], year: int) -> Period | None:
    for p in periods:
        if p.contains(year):
            return p
    return None


def summarize_values(values) -> tuple[int, float, float, float, float, float]:
    """(n, mean, SE, median, Q1, Q3) with interpolated quantiles.

    SE is the sample standard deviation over the square root of n, fixed at
    zero for a single observation.
    """
    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    if n == 0:
        raise ValueError("cannot summarize an empty value list")
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    q1, median, q3 = (float(q) for q in np.quantile(arr, (0.25, 0.5, 0.75)))
    return n, mean, se, median, q1, q3


def aggregate(
    pairs: list[tuple[AlbumRecord, float]],
    periods: list[Period],
    group_by_genre: bool = False,
    min_genre_count: int = DEFAULT_MIN_GENRE_COUNT,
) -> list[AggregateStats]:
    """Reduce joined (record, value) pairs into per-group statistics.

    Groups are periods, or period x genre with multi-genre records counted
    once per genre. Genre groups below min_genre_count are omitted. Records
    outside every period are ignored.
    """
    groups: dict[tuple[int, str | None], list[float]] = {}
    period_by_start = {p.start_year: p for p in periods}
    for rec, value in pairs:
        period = find_period(periods, rec.year)
        if period is None:
            continue
        if group_by_genre:
            for genre in rec.supergenres:
                groups.setdefault((period.start_year, genre), []).append(value)
        else:
            groups.setdefault((period.start_year, None), []).append(value)

    out: list[AggregateStats] = []
    for (start, genre), values in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] or "")):
        if genre is not None and len(values) < min_genre_count:
            continue
        n, mean, se, median, q1, q3 = summarize_values(values)
        out.append(AggregateStats(period_by_start[start], genre, n, mean, se, median, q1, q3))
    return out


def trajectory(pairs: list[tuple[AlbumRecord, tuple[float, float]]], periods: list[Period]) -> list[TrajectoryPoint]:
    """Chronological per-period means of joined (H, C) values."""
    groups: dict[int, list[tuple[float, float]]] = {}
    period_by_start = {p.start_year: p for p in periods}
    for rec, hc in pairs:
        period = find_period(periods, rec.year)
        if period is not None:
            groups.setdefault(period.start_year, []).append(hc)

    out: list[TrajectoryPoint] = []
    for start in sorted(groups):
        hs = [h for h, _ in groups[start]]
        cs = [c for _, c in groups[start]]
        n, mean_h, se_h, _, _, _ = summarize_values(hs)
        _, mean_c, se_c, _, _, _ = summarize_values(cs)
        out.append(TrajectoryPoint(period_by_start[start], n, mean_h, mean_c, se_h, se_c))
    return out
