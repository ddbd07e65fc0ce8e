"""Batch orchestration: scan images into the cache and emit report CSVs.

A scan hashes every manifest file, skips images already cached under the
current config fingerprint, and farms the rest out to a worker pool. Each
worker re-reads and re-hashes its file so the stored hash always matches
the bytes the metrics were computed from. The parent process is the only
cache writer. Per-file failures become skip records and never abort the
batch unless strict mode asks for that.

A report joins album metadata to cached metrics by content hash (via the
path sidecar, falling back to hashing the referenced file) and writes the
plot-ready CSV set.
"""

from __future__ import annotations

import csv
import hashlib
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path

from ._version import __version__
from .cache import CacheStore
from .config import RunConfig
from .corpus import (
    AlbumRecord,
    Period,
    aggregate,
    apply_imputation,
    bin_periods,
    dedupe,
    find_period,
    ingest_metadata,
    load_genre_map,
    load_imputation,
    map_genres,
    summarize_values,
    trajectory,
)
from .detections import class_distribution, load_detections, object_stats
from .errors import MissingMetrics, VisComplexityError
from .imaging import decode_image, resize, to_grayscale
from .mdl import mdlc
from .ordinal import ec_point
from .zipc import zipc

ALL_METRICS = ("ec", "zipc", "mdlc")
_METRIC_FIELDS = {"ec": ("h", "c"), "zipc": ("zipc",), "mdlc": ("mdlc_bits",)}
METRIC_COLUMNS = (("h", "h"), ("c", "c"), ("zipc", "zipc"), ("mdlc", "mdlc_bits"))

OUTPUT_FILES = (
    "ec_by_genre.csv",
    "ec_trajectory.csv",
    "metric_over_time.csv",
    "boxplot_stats.csv",
    "object_distribution.csv",
    "objects_over_time.csv",
)


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def wanted_fields(metrics) -> tuple[str, ...]:
    fields: list[str] = []
    for m in metrics:
        if m not in _METRIC_FIELDS:
            raise ValueError(f"unknown metric {m!r}; expected subset of {ALL_METRICS}")
        fields.extend(_METRIC_FIELDS[m])
    return tuple(fields)


def compute_metrics(data: bytes, cfg: RunConfig, metrics=ALL_METRICS) -> dict:
    """Decode once, then compute the requested metric fields."""
    img = decode_image(data)
    body: dict = {}
    if "ec" in metrics:
        e = img if cfg.ec_resize == 0 else resize(img, cfg.ec_resize, cfg.ec_resize)
        pt = ec_point(to_grayscale(e), stride=cfg.stride)
        body["h"] = pt.h
        body["c"] = pt.c
    if "zipc" in metrics:
        z = img if cfg.zipc_resize == 0 else resize(img, cfg.zipc_resize, cfg.zipc_resize)
        body["zipc"] = zipc(z, level=cfg.zip_level).ratio
    if "mdlc" in metrics:
        body["mdlc_bits"] = mdlc(
            img,
            input_size=cfg.mdl_input_size,
            patch_sizes=cfg.mdl_patch_sizes,
            k_max=cfg.mdl_kmax,
            seed=cfg.seed,
            restarts=cfg.mdl_restarts,
            color=cfg.mdl_color,
        ).bits
    return body


_worker_cfg: RunConfig | None = None
_worker_metrics = ALL_METRICS


def _init_worker(cfg: RunConfig, metrics) -> None:
    global _worker_cfg, _worker_metrics
    _worker_cfg = cfg
    _worker_metrics = metrics


def _scan_one(path: str):
    """Returns (path, image_hash or None, metric body or {'error': msg})."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return path, None, {"error": f"unreadable: {exc}"}
    image_hash = hashlib.sha256(data).hexdigest()
    try:
        body = compute_metrics(data, _worker_cfg, _worker_metrics)
    except VisComplexityError as exc:
        return path, image_hash, {"error": str(exc)}
    return path, image_hash, body


@dataclass
class ScanReport:
    computed: int = 0
    cached: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)


def scan(paths, cfg: RunConfig, cache: CacheStore, metrics=ALL_METRICS, strict: bool = False) -> ScanReport:
    """Compute missing metrics for the manifest and append them to the cache."""
    fingerprint = cfg.fingerprint()
    fields = wanted_fields(metrics)
    report = ScanReport()

    todo: list[str] = []
    for raw_path in paths:
        path = str(raw_path)
        try:
            image_hash = file_hash(path)
        except OSError as exc:
            report.skipped.append((path, f"unreadable: {exc}"))
            if strict:
                raise VisComplexityError(f"{path}: unreadable: {exc}") from exc
            continue
        held = cache.get(image_hash, fingerprint)
        if held is not None and ("error" in held or all(f in held for f in fields)):
            cache.map_path(path, image_hash)
            report.cached += 1
            if "error" in held:
                report.skipped.append((path, held["error"]))
                if strict:
                    raise VisComplexityError(f"{path}: {held['error']}")
            continue
        todo.append(path)

    if not todo:
        return report

    if cfg.workers == 1:
        _init_worker(cfg, metrics)
        results = map(_scan_one, todo)
        pool = None
    else:
        pool = multiprocessing.Pool(cfg.workers, initializer=_init_worker, initargs=(cfg, metrics))
        results = pool.imap_unordered(_scan_one, todo)

    try:
        for path, image_hash, body in results:
            if image_hash is None:
                report.skipped.append((path, body["error"]))
                if strict:
                    raise VisComplexityError(f"{path}: {body['error']}")
                continue
            held = cache.get(image_hash, fingerprint) or {}
            if "error" in body:
                record = {}
                report.skipped.append((path, body["error"]))
            else:
                record = {k: v for k, v in held.items() if k != "error"}
                report.computed += 1
            record.update(body)
            record["image_hash"] = image_hash
            record["config_fingerprint"] = fingerprint
            record["tool_version"] = __version__
            cache.put(record)
            cache.map_path(path, image_hash)
            if "error" in body and strict:
                raise VisComplexityError(f"{path}: {body['error']}")
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return report


@dataclass
class IngestReport:
    merged: int = 0
    unmatched: list[str] = field(default_factory=list)


def ingest_detections(detections_path, cfg: RunConfig, cache: CacheStore, strict: bool = False) -> IngestReport:
    """Merge thresholded object counts into cached metric records.

    Detection image_ids are content hashes, so the join key is the cache
    key itself. Detections for images never scanned are reported back.
    """
    fingerprint = cfg.fingerprint()
    report = IngestReport()
    for rec in load_detections(detections_path):
        held = cache.get(rec.image_id, fingerprint)
        if held is None or "error" in held:
            report.unmatched.append(rec.image_id)
            if strict:
                raise VisComplexityError(f"no cached metrics for image {rec.image_id}")
            continue
        stats = object_stats(rec, tau=cfg.detection_tau)
        updated = dict(held)
        updated["object_count"] = stats.object_count
        cache.put(updated)
        report.merged += 1
    return report


@dataclass
class ReportSummary:
    albums_ingested: int = 0
    albums_after_dedupe: int = 0
    missing_date: int = 0
    row_errors: int = 0
    unmapped_labels: int = 0
    unlabeled_albums: int = 0
    corrupt_skipped: int = 0
    albums_joined: int = 0
    periods: list[Period] = field(default_factory=list)
    written: list[str] = field(default_factory=list)


def _join_metrics(records: list[AlbumRecord], cache: CacheStore, fingerprint: str):
    """Attach each album's cached metric record; corrupt images drop out."""
    joined: list[tuple[AlbumRecord, dict]] = []
    missing: list[str] = []
    corrupt = 0
    hash_memo: dict[str, str | None] = {}
    for rec in records:
        ref = rec.image_ref
        image_hash = cache.paths.get(ref)
        if image_hash is None:
            if ref in hash_memo:
                image_hash = hash_memo[ref]
            else:
                try:
                    image_hash = file_hash(ref)
                except OSError:
                    image_hash = None
                hash_memo[ref] = image_hash
        if image_hash is None:
            missing.append(ref)
            continue
        held = cache.get(image_hash, fingerprint)
        if held is None:
            missing.append(ref)
        elif "error" in held:
            corrupt += 1
        elif all(f in held for f in ("h", "c", "zipc", "mdlc_bits")):
            joined.append((rec, held))
        else:
            missing.append(ref)
    if missing:
        raise MissingMetrics(missing)
    return joined, corrupt


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _stat_cells(n, mean, se, median, q1, q3):
    return [n, mean, se, median, q1, q3, q3 - q1]


def report(
    cfg: RunConfig,
    cache: CacheStore,
    metadata_path,
    genre_map_path,
    out_dir,
    imputation_path=None,
    detections_path=None,
) -> ReportSummary:
    """Join metadata to cached metrics and write the plot-ready CSV set."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = ReportSummary()

    records, cleaning = ingest_metadata(metadata_path)
    summary.albums_ingested = len(records)
    summary.missing_date = cleaning.missing_date
    summary.row_errors = len(cleaning.row_errors)

    records = dedupe(records, cfg.source_priority)
    summary.albums_after_dedupe = len(records)

    gm = load_genre_map(genre_map_path)
    records, mapping = map_genres(records, gm)
    summary.unmapped_labels = sum(mapping.unmapped.values())
    if imputation_path:
        records = apply_imputation(records, load_imputation(imputation_path))
    summary.unlabeled_albums = sum(1 for r in records if not r.supergenres)

    joined, corrupt = _join_metrics(records, cache, cfg.fingerprint())
    summary.corrupt_skipped = corrupt
    summary.albums_joined = len(joined)

    periods = bin_periods([r for r, _ in joined], cfg.binning_threshold) if joined else []
    summary.periods = periods

    _write_ec_by_genre(out / "ec_by_genre.csv", joined, summary)
    _write_ec_trajectory(out / "ec_trajectory.csv", joined, periods, summary)
    _write_metric_over_time(out / "metric_over_time.csv", joined, periods, summary)
    _write_boxplot_stats(out / "boxplot_stats.csv", joined, periods, cfg, summary)

    if detections_path:
        det_stats = _album_object_stats(joined, detections_path, cfg)
        _write_object_distribution(out / "object_distribution.csv", det_stats, cfg, summary)
        _write_objects_over_time(out / "objects_over_time.csv", det_stats, periods, summary)
    return summary


def _write_ec_by_genre(path, joined, summary) -> None:
    by_genre: dict[str, list[tuple[float, float]]] = {}
    for rec, held in joined:
        for genre in rec.supergenres:
            by_genre.setdefault(genre, []).append((held["h"], held["c"]))
    rows = []
    for genre in sorted(by_genre):
        hs = [h for h, _ in by_genre[genre]]
        cs = [c for _, c in by_genre[genre]]
        n, mean_h, se_h, _, _, _ = summarize_values(hs)
        _, mean_c, se_c, _, _, _ = summarize_values(cs)
        rows.append([genre, n, mean_h, se_h, mean_c, se_c])
    _write_csv(path, ["genre", "n", "mean_h", "se_h", "mean_c", "se_c"], rows)
    summary.written.append(str(path))


def _write_ec_trajectory(path, joined, periods, summary) -> None:
    pairs = [(rec, (held["h"], held["c"])) for rec, held in joined]
    rows = [
        [p.period.start_year, p.period.end_year, p.n, p.mean_h, p.se_h, p.mean_c, p.se_c]
        for p in trajectory(pairs, periods)
    ]
    _write_csv(
        path,
        ["period_start", "period_end", "n", "mean_h", "se_h", "mean_c", "se_c"],
        rows,
    )
    summary.written.append(str(path))


def _write_metric_over_time(path, joined, periods, summary) -> None:
    rows = []
    for name, fld in METRIC_COLUMNS:
        pairs = [(rec, held[fld]) for rec, held in joined]
        for stats in aggregate(pairs, periods, group_by_genre=False):
            rows.append(
                [name, stats.period.start_year, stats.period.end_year]
                + _stat_cells(stats.n, stats.mean, stats.se, stats.median, stats.q1, stats.q3)
            )
    _write_csv(
        path,
        ["metric", "period_start", "period_end", "n", "mean", "se", "median", "q1", "q3", "iqr"],
        rows,
    )
    summary.written.append(str(path))


def _write_boxplot_stats(path, joined, periods, cfg, summary) -> None:
    """Wide rows: one per period (genre blank) and per period x genre."""
    header = ["period_start", "period_end", "genre", "n"]
    for name, _ in METRIC_COLUMNS:
        header += [f"mean_{name}", f"se_{name}", f"median_{name}", f"q1_{name}", f"q3_{name}", f"iqr_{name}"]

    groups: dict[tuple[int, str], list[dict]] = {}
    for rec, held in joined:
        period = find_period(periods, rec.year)
        if period is None:
            continue
        groups.setdefault((period.start_year, ""), []).append(held)
        for genre in rec.supergenres:
            groups.setdefault((period.start_year, genre), []).append(held)

    period_by_start = {p.start_year: p for p in periods}
    rows = []
    for (start, genre), helds in sorted(groups.items()):
        if genre and len(helds) < cfg.min_genre_count:
            continue
        period = period_by_start[start]
        row = [period.start_year, period.end_year, genre, len(helds)]
        for _, fld in METRIC_COLUMNS:
            n, mean, se, median, q1, q3 = summarize_values([h[fld] for h in helds])
            row += [mean, se, median, q1, q3, q3 - q1]
        rows.append(row)
    _write_csv(path, header, rows)
    summary.written.append(str(path))


def _album_object_stats(joined, detections_path, cfg):
    """One thresholded summary per album whose hash appears in the file."""
    by_id = {rec.image_id: rec for rec in load_detections(detections_path)}
    out = []
    for rec, held in joined:
        det = by_id.get(held["image_hash"])
        if det is not None:
            out.append((rec, object_stats(det, tau=cfg.detection_tau)))
    return out


def _write_object_distribution(path, det_stats, cfg, summary) -> None:
    dist = class_distribution(
        [s for _, s in det_stats], unique_classes=cfg.detection_unique_classes
    )
    rows = [[label, dist[label]] for label in sorted(dist)]
    _write_csv(path, ["class", "proportion"], rows)
    summary.written.append(str(path))


def _write_objects_over_time(path, det_stats, periods, summary) -> None:
    groups: dict[int, list[int]] = {}
    for rec, stats in det_stats:
        period = find_period(periods, rec.year)
        if period is not None:
            groups.setdefault(period.start_year, []).append(stats.object_count)
    period_by_start = {p.start_year: p for p in periods}
    rows = []
    for start in sorted(groups):
        counts = groups[start]
        n, mean, se, _, _, _ = summarize_values(counts)
        zero_share = sum(1 for c in counts if c == 0) / n
        period = period_by_start[start]
        rows.append([period.start_year, period.end_year, n, mean, se, zero_share])
    _write_csv(
        path,
        ["period_start", "period_end", "n", "mean_objects", "se_objects", "zero_share"],
        rows,
    )
    summary.written.append(str(path))
