"""Corpus loading: parsing, validation, consolidation, round-trips."""

import json
from datetime import datetime, timezone

import numpy as np
import pytest

from vidtriage.corpus import (
    AnnotationLabels,
    CorpusError,
    IntegrityError,
    SchemaError,
    consolidate_labels,
    dedupe_ids,
    flatten_api_response,
    load_corpus,
    parse_iso_duration,
    parse_labels,
    parse_ocr,
    parse_transcript,
    parse_video_metadata,
    write_jsonl,
)


# ------------------------------------------------------------- durations


def test_iso_duration_fixture():
    assert parse_iso_duration("PT3M28S") == 208


def test_iso_duration_forms():
    assert parse_iso_duration("PT45S") == 45
    assert parse_iso_duration("PT10M") == 600
    assert parse_iso_duration("PT1H2M3S") == 3723
    assert parse_iso_duration("PT1H") == 3600


def test_iso_duration_rejects_garbage():
    for bad in ("", "3m28s", "P3M28S", "PT", "PTXS"):
        with pytest.raises((SchemaError, ValueError)):
            parse_iso_duration(bad)


# -------------------------------------------------------------- metadata


def test_parse_video_metadata_roundtrip():
    obj = {
        "video_id": "v1",
        "channel_id": "c9",
        "published_at": "2019-06-12T14:30:00Z",
        "title": "T",
        "description": "D",
        "tags": ["a", "b"],
        "duration_s": "PT3M28S",
        "definition": "hd",
        "caption_available": True,
        "view_count": 5,
    }
    rec = parse_video_metadata(json.dumps(obj))
    assert rec.duration_s == 208
    assert rec.published_at == datetime(2019, 6, 12, 14, 30,
                                        tzinfo=timezone.utc)
    assert rec.tags == ("a", "b")
    assert rec.like_count is None
    again = parse_video_metadata(json.dumps(rec.to_json_dict()))
    assert again == rec


def test_parse_video_metadata_validation():
    with pytest.raises(SchemaError):
        parse_video_metadata(json.dumps({"title": "no id"}))
    with pytest.raises(SchemaError):
        parse_video_metadata(json.dumps({"video_id": "v", "duration_s": -4}))
    with pytest.raises(SchemaError):
        parse_video_metadata(
            json.dumps({"video_id": "v", "definition": "4k"})
        )
    with pytest.raises(SchemaError):
        parse_video_metadata(
            json.dumps({"video_id": "v", "view_count": -1})
        )
    with pytest.raises(SchemaError):
        parse_video_metadata("[1, 2]")


def test_parse_transcript_and_confidence():
    doc = parse_transcript(json.dumps({
        "video_id": "v1",
        "segments": [
            {"text": "one two three", "confidence": 0.9},
            {"text": "four", "confidence": 0.5},
        ],
    }))
    assert doc.text == "one two three four"
    # Word-count weighting: (3*0.9 + 1*0.5) / 4.
    assert doc.confidence == pytest.approx(0.8)
    with pytest.raises(SchemaError):
        parse_transcript(json.dumps({
            "video_id": "v", "segments": [{"text": "x", "confidence": 1.2}],
        }))


def test_parse_ocr_and_confidence():
    doc = parse_ocr(json.dumps({
        "video_id": "v1",
        "blocks": [
            {"text": "a", "confidence": 0.8, "frame_time_s": 1.0},
            {"text": "b", "confidence": 0.6, "frame_time_s": 2.0},
        ],
        "shot_count": 4,
        "shot_change_confidence": 0.5,
    }))
    assert doc.confidence == pytest.approx(0.7)
    assert doc.shot_count == 4
    empty = parse_ocr(json.dumps({"video_id": "v2"}))
    assert empty.confidence == 0.0 and empty.text == ""
    with pytest.raises(SchemaError):
        parse_ocr(json.dumps({"video_id": "v", "shot_count": -1}))


# ---------------------------------------------------------------- labels


def test_parse_labels_binary_only():
    with pytest.raises(SchemaError):
        parse_labels(json.dumps({
            "video_id": "v", "medical_info_high": 2,
            "understandable": 0, "recommended": 0,
        }))


def test_consolidate_majority_and_tie():
    def lab(mid, u, r, a):
        return AnnotationLabels("v", mid, u, r, a)

    merged = consolidate_labels(
        [lab(1, 1, 1, "a1"), lab(1, 0, 0, "a2"), lab(0, 1, 0, "a3")]
    )
    assert (merged.medical_info_high, merged.understandable,
            merged.recommended) == (1, 1, 0)
    # Even split resolves to 0.
    tie = consolidate_labels([lab(1, 1, 1, "a1"), lab(0, 0, 0, "a2")])
    assert (tie.medical_info_high, tie.understandable, tie.recommended) \
        == (0, 0, 0)
    with pytest.raises(SchemaError):
        consolidate_labels([])
    with pytest.raises(SchemaError):
        consolidate_labels([lab(1, 1, 1, "a"),
                            AnnotationLabels("w", 1, 1, 1, "b")])


def test_consolidate_majority_random_loop():
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = int(rng.integers(1, 8))
        votes = rng.integers(0, 2, size=(n, 3))
        rows = [AnnotationLabels("v", int(v[0]), int(v[1]), int(v[2]), f"a{i}")
                for i, v in enumerate(votes)]
        merged = consolidate_labels(rows)
        for j, name in enumerate(
            ("medical_info_high", "understandable", "recommended")
        ):
            expected = 1 if votes[:, j].sum() * 2 > n else 0
            assert getattr(merged, name) == expected


# ------------------------------------------------------------ full loads


def test_load_corpus_fixture(store):
    assert store.summary.one_line() \
        == "5 videos, 5 transcripts, 5 ocr, 15 labels"
    assert store.labeled_ids() == ["vid001", "vid002", "vid003", "vid004",
                                   "vid005"]
    assert store.videos["vid001"].duration_s == 208
    assert store.labels["vid002"].recommended == 0
    assert store.labels["vid002"].annotator_id == "consensus"


def test_load_corpus_missing_file(corpus_paths, tmp_path):
    with pytest.raises(FileNotFoundError) as err:
        load_corpus(corpus_paths["videos"], corpus_paths["transcripts"],
                    corpus_paths["ocr"], tmp_path / "absent.jsonl")
    assert "absent.jsonl" in str(err.value)


def test_load_corpus_dangling_and_duplicate(tmp_path, corpus_paths):
    videos = tmp_path / "videos.jsonl"
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    videos.write_text(
        json.dumps({"video_id": "v1"}) + "\n" + json.dumps({"video_id": "v1"})
    )
    with pytest.raises(IntegrityError):
        load_corpus(videos, empty, empty, empty)

    videos.write_text(json.dumps({"video_id": "v1"}))
    labels = tmp_path / "labels.jsonl"
    labels.write_text(json.dumps({
        "video_id": "ghost", "medical_info_high": 1,
        "understandable": 1, "recommended": 1,
    }))
    with pytest.raises(IntegrityError) as err:
        load_corpus(videos, empty, empty, labels)
    assert "ghost" in str(err.value)


def test_load_corpus_error_names_line(tmp_path):
    videos = tmp_path / "videos.jsonl"
    videos.write_text(json.dumps({"video_id": "v1"}) + "\n{not json")
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(CorpusError) as err:
        load_corpus(videos, empty, empty, empty)
    assert "videos.jsonl:2" in str(err.value)


def test_write_jsonl_roundtrip_and_sorted_keys(tmp_path, store):
    out = tmp_path / "videos.jsonl"
    write_jsonl(out, [store.videos[v] for v in sorted(store.videos)])
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    for line in lines:
        obj = json.loads(line)
        assert list(obj) == sorted(obj)
    again = [parse_video_metadata(line) for line in lines]
    assert again == [store.videos[v] for v in sorted(store.videos)]


def test_dedupe_ids_keeps_first():
    assert dedupe_ids(["a", "b", "a", "c", "b"]) == ["a", "b", "c"]


# ------------------------------------------------------------ api adapter


def test_flatten_api_response(fixture_dir):
    text = (fixture_dir / "api_response.json").read_text()
    records = flatten_api_response(text)
    assert [r.video_id for r in records] == ["api001", "api002"]
    assert records[0].duration_s == 208
    assert records[0].caption_available is True
    assert records[0].view_count == 1200
    assert records[1].like_count is None
    with pytest.raises(SchemaError):
        flatten_api_response(json.dumps({"kind": "x"}))
