"""Detection NDJSON parsing, thresholding, and class distributions."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscomplexity.detections import (
    COCO_CLASSES,
    NONE_TOKEN,
    Detection,
    ImageDetections,
    class_distribution,
    load_detections,
    object_stats,
    parse_detections_line,
    parse_detections_stream,
    serialize_detections_line,
)
from viscomplexity.errors import DuplicateImage, ParseError, UnknownClass


def _line(image_id="abc", detections=()):
    return json.dumps({"image_id": image_id, "detections": list(detections)})


def test_vocabulary_has_eighty_classes():
    assert len(COCO_CLASSES) == 80
    assert len(set(COCO_CLASSES)) == 80


def test_parse_record_with_two_detections():
    rec = parse_detections_line(_line(detections=[
        {"class": "person", "conf": 0.9, "bbox": [1, 2, 3, 4]},
        {"class": "dog", "conf": 0.5},
    ]))
    assert rec.image_id == "abc"
    assert len(rec.detections) == 2
    assert rec.detections[0].bbox == (1.0, 2.0, 3.0, 4.0)
    assert rec.detections[1].bbox is None


def test_unknown_class_rejected():
    with pytest.raises(UnknownClass):
        parse_detections_line(_line(detections=[{"class": "dragon", "conf": 0.9}]))


def test_malformed_lines_report_line_number():
    with pytest.raises(ParseError) as err:
        parse_detections_stream(["{}", _line()])
    assert err.value.line == 1

    with pytest.raises(ParseError) as err:
        parse_detections_stream([_line(), "not json"])
    assert err.value.line == 2


@pytest.mark.parametrize("det", [
    {"class": "person"},
    {"class": 3, "conf": 0.5},
    {"class": "person", "conf": "high"},
    {"class": "person", "conf": 1.5},
    {"class": "person", "conf": -0.1},
    {"class": "person", "conf": 0.5, "bbox": [1, 2, 3]},
    {"class": "person", "conf": 0.5, "bbox": [1, 2, 3, "x"]},
])
def test_bad_detection_fields_rejected(det):
    with pytest.raises(ParseError):
        parse_detections_line(_line(detections=[det]))


def test_duplicate_image_id_rejected():
    with pytest.raises(DuplicateImage):
        parse_detections_stream([_line("same"), _line("same")])


def test_empty_stream_and_blank_lines():
    assert parse_detections_stream([]) == []
    assert len(parse_detections_stream(["", _line(), "  "])) == 1


def test_load_preserves_input_order(tmp_path):
    f = tmp_path / "d.ndjson"
    f.write_text(_line("b") + "\n" + _line("a") + "\n")
    assert [r.image_id for r in load_detections(f)] == ["b", "a"]


def test_serialize_round_trip():
    rec = parse_detections_line(_line(detections=[
        {"class": "cat", "conf": 0.75, "bbox": [0.5, 1.5, 2.0, 3.25]},
        {"class": "tie", "conf": 0.3},
    ]))
    again = parse_detections_line(serialize_detections_line(rec))
    assert again == rec


def test_threshold_is_inclusive():
    rec = ImageDetections("x", (
        Detection("person", 0.9), Detection("dog", 0.25), Detection("cat", 0.2499),
    ))
    stats = object_stats(rec, tau=0.25)
    assert stats.object_count == 2
    assert stats.classes == ("person", "dog")


def test_threshold_anchor_case():
    rec = ImageDetections("x", (Detection("person", 0.9), Detection("dog", 0.2)))
    stats = object_stats(rec, tau=0.25)
    assert stats.object_count == 1 and stats.classes == ("person",)


def test_zero_threshold_keeps_everything():
    rec = ImageDetections("x", (Detection("person", 0.0), Detection("dog", 0.1)))
    assert object_stats(rec, tau=0.0).object_count == 2


def test_no_detections_yield_zero_count():
    assert object_stats(ImageDetections("x", ())).object_count == 0


@settings(max_examples=80, deadline=None)
@given(
    confs=st.lists(st.floats(0, 1), max_size=12),
    tau_lo=st.floats(0, 1),
    tau_hi=st.floats(0, 1),
)
def test_count_is_monotone_in_threshold(confs, tau_lo, tau_hi):
    lo, hi = sorted((tau_lo, tau_hi))
    rec = ImageDetections("x", tuple(Detection("person", c) for c in confs))
    assert object_stats(rec, tau=lo).object_count >= object_stats(rec, tau=hi).object_count


def test_distribution_counts_multiset_tokens():
    stats = [
        object_stats(ImageDetections("a", (Detection("person", 0.9), Detection("person", 0.8)))),
        object_stats(ImageDetections("b", ())),
    ]
    dist = class_distribution(stats)
    assert dist == {"person": 2 / 3, NONE_TOKEN: 1 / 3}


def test_distribution_unique_mode_collapses_repeats():
    stats = [
        object_stats(ImageDetections("a", (Detection("person", 0.9), Detection("person", 0.8)))),
        object_stats(ImageDetections("b", (Detection("dog", 0.9),))),
    ]
    dist = class_distribution(stats, unique_classes=True)
    assert dist == {"person": 0.5, "dog": 0.5}


def test_distribution_empty_input():
    assert class_distribution([]) == {}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.sampled_from(COCO_CLASSES[:6]), max_size=5), min_size=1, max_size=10))
def test_distribution_sums_to_one(class_lists):
    stats = [
        object_stats(ImageDetections(f"id{i}", tuple(Detection(c, 0.9) for c in classes)))
        for i, classes in enumerate(class_lists)
    ]
    assert sum(class_distribution(stats).values()) == pytest.approx(1.0, abs=1e-9)
