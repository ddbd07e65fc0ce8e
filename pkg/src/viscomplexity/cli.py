"""Command-line front-end.

Subcommands:
    scan               compute per-image metrics into the cache
    ingest-detections  merge detector output into cached records
    aggregate          dry-run the corpus machinery and show the periods
    report             write the plot-ready CSV set
    selftest           quick determinism and sanity checks

Every metric knob can come from a `key = value` config file (--config)
with individual flags overriding it. Exit code is 0 only when nothing
fatal happened; --strict promotes per-file problems to fatal.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._version import __version__
from .cache import CacheStore
from .config import RunConfig, load_config
from .corpus import (
    apply_imputation,
    bin_periods,
    dedupe,
    ingest_metadata,
    load_genre_map,
    load_imputation,
    map_genres,
)
from .errors import VisComplexityError
from .imaging import RGBImage, decode_image, encode_png
from .mdl import mdlc
from .ordinal import (
    JS_DIVERGENCE_MAX,
    OrdinalDistribution,
    ec_point,
    js_divergence_to_uniform,
)
from .pipeline import ALL_METRICS, ingest_detections, report, scan
from .zipc import zipc


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("run configuration")
    g.add_argument("--config", metavar="FILE", help="key = value config file")
    g.add_argument("--stride", type=int)
    g.add_argument("--ec-resize", type=int, dest="ec_resize",
                   help="square edge for entropy/complexity input; 0 keeps original")
    g.add_argument("--zipc-resize", type=int, dest="zipc_resize")
    g.add_argument("--mdl-input-size", type=int, dest="mdl_input_size")
    g.add_argument("--mdl-patch-sizes", dest="mdl_patch_sizes",
                   type=lambda s: tuple(int(v) for v in s.split(",") if v.strip()))
    g.add_argument("--mdl-kmax", type=int, dest="mdl_kmax")
    g.add_argument("--mdl-restarts", type=int, dest="mdl_restarts")
    g.add_argument("--mdl-color", choices=("rgb", "gray"), dest="mdl_color")
    g.add_argument("--zip-level", type=int, dest="zip_level")
    g.add_argument("--detection-tau", type=float, dest="detection_tau")
    g.add_argument("--detection-unique-classes", action="store_const", const=True,
                   dest="detection_unique_classes")
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--binning-threshold", type=int, dest="binning_threshold")
    g.add_argument("--min-genre-count", type=int, dest="min_genre_count")
    g.add_argument("--source-priority", dest="source_priority",
                   type=lambda s: tuple(v.strip() for v in s.split(",") if v.strip()))


_CONFIG_KEYS = (
    "stride", "ec_resize", "zipc_resize", "mdl_input_size", "mdl_patch_sizes",
    "mdl_kmax", "mdl_restarts", "mdl_color", "zip_level", "detection_tau",
    "detection_unique_classes", "seed", "workers", "binning_threshold",
    "min_genre_count", "source_priority",
)


def _build_config(args: argparse.Namespace) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return load_config(getattr(args, "config", None), **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viscomplexity",
        description="Visual complexity metrics and corpus reports for album covers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="compute per-image metrics into the cache")
    p.add_argument("images", nargs="*", help="image files")
    p.add_argument("--manifest", help="file with one image path per line")
    p.add_argument("--cache", required=True, help="metric cache file")
    p.add_argument("--metrics", default=",".join(ALL_METRICS),
                   help="comma subset of ec,zipc,mdlc")
    p.add_argument("--strict", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("ingest-detections", help="merge detector output into the cache")
    p.add_argument("--detections", required=True, help="NDJSON detection file")
    p.add_argument("--cache", required=True)
    p.add_argument("--strict", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("aggregate", help="dry-run dedupe/mapping/binning on metadata")
    p.add_argument("--metadata", required=True, help="album metadata CSV")
    p.add_argument("--genre-map", required=True, dest="genre_map")
    p.add_argument("--imputation")
    p.add_argument("--out", help="write the period table as CSV here")
    p.add_argument("--strict", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("report", help="write the plot-ready CSV set")
    p.add_argument("--metadata", required=True)
    p.add_argument("--genre-map", required=True, dest="genre_map")
    p.add_argument("--cache", required=True)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.add_argument("--imputation")
    p.add_argument("--detections")
    p.add_argument("--strict", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("selftest", help="quick determinism and sanity checks")
    _add_config_flags(p)

    return parser


def _read_manifest(args: argparse.Namespace) -> list[str]:
    paths = list(args.images)
    if args.manifest:
        with open(args.manifest, encoding="utf-8") as fh:
            paths.extend(line.strip() for line in fh if line.strip())
    if not paths:
        raise VisComplexityError("no images given (positional paths or --manifest)")
    return paths


def _cmd_scan(args) -> int:
    cfg = _build_config(args)
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    with CacheStore(args.cache) as cache:
        rep = scan(_read_manifest(args), cfg, cache, metrics=metrics, strict=args.strict)
    print(f"computed {rep.computed}, cache hits {rep.cached}, skipped {len(rep.skipped)}")
    for path, msg in rep.skipped:
        print(f"skip {path}: {msg}", file=sys.stderr)
    return 0


def _cmd_ingest(args) -> int:
    cfg = _build_config(args)
    with CacheStore(args.cache) as cache:
        rep = ingest_detections(args.detections, cfg, cache, strict=args.strict)
    print(f"merged {rep.merged}, unmatched {len(rep.unmatched)}")
    for image_id in rep.unmatched:
        print(f"unmatched image_id {image_id}", file=sys.stderr)
    return 0


def _cmd_aggregate(args) -> int:
    cfg = _build_config(args)
    records, cleaning = ingest_metadata(args.metadata)
    records = dedupe(records, cfg.source_priority)
    gm = load_genre_map(args.genre_map)
    records, mapping = map_genres(records, gm)
    if args.imputation:
        records = apply_imputation(records, load_imputation(args.imputation))
    if args.strict and (cleaning.row_errors or mapping.unmapped):
        problems = [str(e) for e in cleaning.row_errors]
        problems += [f"unmapped label {label!r}" for label in sorted(mapping.unmapped)]
        raise VisComplexityError("; ".join(problems))
    periods = bin_periods(records, cfg.binning_threshold)

    print(f"albums {len(records)}, dropped dateless {cleaning.missing_date}, "
          f"bad rows {len(cleaning.row_errors)}, unmapped labels {len(mapping.unmapped)}, "
          f"unlabeled {sum(1 for r in records if not r.supergenres)}")
    for p in periods:
        print(f"period {p.start_year}-{p.end_year}: {p.album_count} albums")
    if args.out:
        import csv as _csv

        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = _csv.writer(fh, lineterminator="\n")
            w.writerow(["period_start", "period_end", "album_count"])
            w.writerows([p.start_year, p.end_year, p.album_count] for p in periods)
    return 0


def _cmd_report(args) -> int:
    cfg = _build_config(args)
    with CacheStore(args.cache) as cache:
        summary = report(
            cfg,
            cache,
            args.metadata,
            args.genre_map,
            args.out_dir,
            imputation_path=args.imputation,
            detections_path=args.detections,
        )
    print(f"albums {summary.albums_joined} joined "
          f"({summary.albums_ingested} ingested, {summary.albums_after_dedupe} after dedupe, "
          f"{summary.corrupt_skipped} corrupt skipped)")
    for path in summary.written:
        print(f"wrote {path}")
    return 0


def _selftest_images():
    rng = np.random.default_rng(7)
    flat = RGBImage(np.full((64, 64, 3), 128, dtype=np.uint8))
    noise = RGBImage(rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8))
    ramp = np.tile(np.arange(64, dtype=np.uint8) * 4, (64, 1))
    gradient = RGBImage(np.stack([ramp, ramp, ramp], axis=2))
    return flat, noise, gradient


def _cmd_selftest(args) -> int:
    cfg = _build_config(args)
    flat, noise, gradient = _selftest_images()
    checks: list[tuple[str, bool]] = []

    flat_pt = ec_point(flat.pixels[:, :, 0])
    noise_pt = ec_point(noise.pixels[:, :, 0])
    checks.append(("flat image has zero entropy and complexity",
                   flat_pt.h == 0.0 and flat_pt.c == 0.0))
    checks.append(("noise entropy near one", noise_pt.h > 0.95))

    counts = np.zeros(24, dtype=np.int64)
    counts[0] = 100
    delta = OrdinalDistribution(counts=counts, total=100)
    checks.append(("divergence normalizer matches its definition",
                   abs(js_divergence_to_uniform(delta) - JS_DIVERGENCE_MAX) < 1e-12))

    z1 = zipc(noise, level=cfg.zip_level).ratio
    z2 = zipc(decode_image(encode_png(noise)), level=cfg.zip_level).ratio
    checks.append(("compression ratio stable across encode round-trip", z1 == z2))
    checks.append(("noise compresses worse than a gradient",
                   z1 > zipc(gradient, level=cfg.zip_level).ratio))

    flat_bits = mdlc(flat, input_size=64, seed=cfg.seed).bits
    noise_bits = mdlc(noise, input_size=64, seed=cfg.seed).bits
    checks.append(("flat image costs fewer bits than noise", flat_bits < noise_bits))

    checks.append(("fingerprint tracks metric config",
                   cfg.fingerprint() != cfg.replace(stride=cfg.stride + 1).fingerprint()))

    failed = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failed += 0 if ok else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "scan": _cmd_scan,
        "ingest-detections": _cmd_ingest,
        "aggregate": _cmd_aggregate,
        "report": _cmd_report,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except VisComplexityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
