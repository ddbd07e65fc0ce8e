"""Append-only metric cache keyed by (image_hash, config_fingerprint).

Each line is one canonical JSON record. Appends are the only write path
during a scan, so an interrupted run loses at most a partial trailing
line; load tolerates and drops undecodable lines. On startup the file is
compacted: last record per key wins and records are rewritten sorted by
key, which makes cache bytes independent of arrival order.

A sidecar file (cache path + ".paths") remembers which source path
produced which image hash so reports can join metadata rows to cached
records without re-hashing every file.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

RECORD_FIELDS = ("image_hash", "config_fingerprint", "tool_version")
PATHS_SUFFIX = ".paths"


def canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def record_key(record: dict) -> tuple[str, str]:
    return record["image_hash"], record["config_fingerprint"]


def _load_ndjson(path: Path) -> list[dict]:
    if not path.exists():
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                continue  # partial line from an interrupted append
            if isinstance(obj, dict):
                out.append(obj)
    return out


def _rewrite_atomic(path: Path, lines: list[str]) -> None:
    content = "".join(lines)
    if path.exists() and path.read_text(encoding="utf-8") == content:
        return
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


class CacheStore:
    """Compacting NDJSON store; put() appends and flushes immediately."""

    def __init__(self, path):
        self.path = Path(path)
        self.paths_file = Path(str(path) + PATHS_SUFFIX)
        self.path.parent.mkdir(parents=True, exist_ok=True)

        self.records: dict[tuple[str, str], dict] = {}
        for rec in _load_ndjson(self.path):
            if "image_hash" in rec and "config_fingerprint" in rec:
                self.records[record_key(rec)] = rec
        _rewrite_atomic(
            self.path,
            [canonical_line(self.records[k]) for k in sorted(self.records)],
        )

        self.paths: dict[str, str] = {}
        for rec in _load_ndjson(self.paths_file):
            if "path" in rec and "image_hash" in rec:
                self.paths[rec["path"]] = rec["image_hash"]
        _rewrite_atomic(
            self.paths_file,
            [
                canonical_line({"path": p, "image_hash": h})
                for p, h in sorted(self.paths.items())
            ],
        )

        self._fh = open(self.path, "a", encoding="utf-8")
        self._paths_fh = open(self.paths_file, "a", encoding="utf-8")

    def has(self, image_hash: str, fingerprint: str) -> bool:
        return (image_hash, fingerprint) in self.records

    def get(self, image_hash: str, fingerprint: str) -> dict | None:
        return self.records.get((image_hash, fingerprint))

    def put(self, record: dict) -> bool:
        """Append unless an identical record is already stored."""
        key = record_key(record)
        if self.records.get(key) == record:
            return False
        self.records[key] = record
        self._fh.write(canonical_line(record))
        self._fh.flush()
        return True

    def map_path(self, path: str, image_hash: str) -> None:
        if self.paths.get(path) == image_hash:
            return
        self.paths[path] = image_hash
        self._paths_fh.write(canonical_line({"path": path, "image_hash": image_hash}))
        self._paths_fh.flush()

    def for_fingerprint(self, fingerprint: str) -> dict[str, dict]:
        return {
            h: rec
            for (h, fp), rec in self.records.items()
            if fp == fingerprint
        }

    def close(self) -> None:
        self._fh.close()
        self._paths_fh.close()

    def __enter__(self) -> "CacheStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
