"""Ingest of externally produced object-detection results.

Detections arrive as NDJSON: one JSON object per line with an "image_id"
string and a "detections" list of {"class", "conf", "bbox"} records (bbox
optional, retained but unused downstream). The class vocabulary is the fixed
80-label COCO set. Records are filtered at a confidence threshold (inclusive)
and summarized per image as an object count plus a class multiset; a config
switch collapses the multiset to unique labels. Corpus-level class
distributions count one token per surviving detection and one "(none)" token
per image with no survivors, so the proportions always sum to one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DuplicateImage, ParseError, UnknownClass

DEFAULT_TAU = 0.25
NONE_TOKEN = "(none)"

COCO_CLASSES = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella", "handbag",
    "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard",
    "tennis racket", "bottle", "wine glass", "cup", "fork", "knife", "spoon",
    "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot",
    "hot dog", "pizza", "donut", "cake", "chair", "couch", "potted plant",
    "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "microwave", "oven", "toaster", "sink",
    "refrigerator", "book", "clock", "vase", "scissors", "teddy bear",
    "hair drier", "toothbrush",
)

_CLASS_SET = frozenset(COCO_CLASSES)


@dataclass(frozen=True)
class Detection:
    """One detector hit: class label, confidence, optional xywh box."""

    label: str
    conf: float
    bbox: tuple[float, float, float, float] | None = None


@dataclass(frozen=True)
class ImageDetections:
    """All hits for one image, in file order."""

    image_id: str
    detections: tuple[Detection, ...]

    def above(self, tau: float) -> tuple[Detection, ...]:
        return tuple(d for d in self.detections if d.conf >= tau)


@dataclass
class ObjectStats:
    """Per-image summary after thresholding; object_count == len(classes)."""

    image_id: str
    object_count: int
    classes: tuple[str, ...]


def _parse_detection(obj, line_no: int) -> Detection:
    if not isinstance(obj, dict):
        raise ParseError(line_no, "detection must be a JSON object")
    try:
        label = obj["class"]
        conf = obj["conf"]
    except KeyError as exc:
        raise ParseError(line_no, f"detection missing field {exc}") from exc
    if not isinstance(label, str):
        raise ParseError(line_no, "detection class must be a string")
    if label not in _CLASS_SET:
        raise UnknownClass(f"line {line_no}: unknown class {label!r}")
    if not isinstance(conf, (int, float)) or isinstance(conf, bool):
        raise ParseError(line_no, "detection conf must be a number")
    if not 0.0 <= conf <= 1.0:
        raise ParseError(line_no, f"detection conf {conf} outside [0, 1]")
    bbox = obj.get("bbox")
    box = None
    if bbox is not None:
        if not (isinstance(bbox, list) and len(bbox) == 4):
            raise ParseError(line_no, "detection bbox must be a 4-element list")
        try:
            box = tuple(float(v) for v in bbox)
        except (TypeError, ValueError) as exc:
            raise ParseError(line_no, "detection bbox values must be numbers") from exc
    return Detection(label=label, conf=float(conf), bbox=box)


def parse_detections_line(line: str, line_no: int = 1) -> ImageDetections:
    """One NDJSON record; raises ParseError/UnknownClass on malformed input."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError(line_no, "record must be a JSON object")
    image_id = obj.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        raise ParseError(line_no, "image_id must be a non-empty string")
    dets = obj.get("detections")
    if not isinstance(dets, list):
        raise ParseError(line_no, "detections must be a list")
    parsed = tuple(_parse_detection(d, line_no) for d in dets)
    return ImageDetections(image_id=image_id, detections=parsed)


def serialize_detections_line(rec: ImageDetections) -> str:
    """Inverse of parse_detections_line, minus insignificant whitespace."""
    dets = []
    for d in rec.detections:
        obj = {"class": d.label, "conf": d.conf}
        if d.bbox is not None:
            obj["bbox"] = list(d.bbox)
        dets.append(obj)
    return json.dumps({"image_id": rec.image_id, "detections": dets})


def parse_detections_stream(lines) -> list[ImageDetections]:
    """Parse NDJSON lines in order; a repeated image_id is an error."""
    out: list[ImageDetections] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        rec = parse_detections_line(line, line_no)
        if rec.image_id in seen:
            raise DuplicateImage(f"line {line_no}: duplicate image_id {rec.image_id!r}")
        seen.add(rec.image_id)
        out.append(rec)
    return out


def load_detections(path) -> list[ImageDetections]:
    with open(path, encoding="utf-8") as fh:
        return parse_detections_stream(fh)


def object_stats(rec: ImageDetections, tau: float = DEFAULT_TAU) -> ObjectStats:
    """Threshold one image's detections into a count and a class multiset."""
    kept = rec.above(tau)
    return ObjectStats(
        image_id=rec.image_id,
        object_count=len(kept),
        classes=tuple(d.label for d in kept),
    )


def class_distribution(
    stats: list[ObjectStats], unique_classes: bool = False
) -> dict[str, float]:
    """Token proportions over images: detections plus one (none) per empty image.

    With unique_classes set, repeated labels on one image collapse to a single
    token before counting.
    """
    counts: dict[str, int] = {}
    total = 0
    for s in stats:
        tokens = s.classes if s.classes else (NONE_TOKEN,)
        if unique_classes:
            tokens = tuple(dict.fromkeys(tokens))
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
            total += 1
    if total == 0:
        return {}
    return {label: n / total for label, n in counts.items()}
