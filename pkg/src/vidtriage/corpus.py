"""Video corpus ingestion: metadata, transcripts, OCR documents, and annotations.

All corpus files are JSON Lines (one UTF-8 object per line). The loader
enforces referential integrity: every transcript, OCR document, and label
must point at a known video. Stores are frozen after construction and have
no mutation API, so they are safe for concurrent reads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence


class CorpusError(Exception):
    """Base class for corpus ingestion failures."""


class ParseError(CorpusError):
    """Malformed JSON. Carries the byte offset of the first bad character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaError(CorpusError):
    """Structurally valid JSON that violates the record schema."""


class IntegrityError(CorpusError):
    """Cross-file referential integrity violation."""


_COUNT_FIELDS = ("view_count", "like_count", "dislike_count", "comment_count")

# ISO-8601 durations as emitted by the video metadata API, e.g. "PT3M28S".
_ISO_DURATION_RE = re.compile(
    r"^P(?:(?P<days>\d+)D)?"
    r"(?:T(?:(?P<hours>\d+)H)?(?:(?P<minutes>\d+)M)?(?:(?P<seconds>\d+)S)?)?$"
)


def parse_iso_duration(text: str) -> int:
    """Convert an ISO-8601 duration string to whole seconds."""
    m = _ISO_DURATION_RE.match(text)
    if m is None or text in ("P", "PT"):
        raise SchemaError(f"unparseable ISO-8601 duration: {text!r}")
    days = int(m.group("days") or 0)
    hours = int(m.group("hours") or 0)
    minutes = int(m.group("minutes") or 0)
    seconds = int(m.group("seconds") or 0)
    return ((days * 24 + hours) * 60 + minutes) * 60 + seconds


def _parse_timestamp(text: str) -> datetime:
    # The upstream API uses a trailing "Z"; fromisoformat on 3.10 does not.
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise SchemaError(f"bad timestamp {text!r}: {exc}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class VideoRecord:
    """Metadata for one video, as retrieved from the public data API."""

    video_id: str
    channel_id: str = ""
    published_at: Optional[datetime] = None
    title: str = ""
    description: str = ""
    tags: tuple[str, ...] = ()
    duration_s: int = 0
    definition: str = "sd"
    caption_available: bool = False
    view_count: Optional[int] = None
    like_count: Optional[int] = None
    dislike_count: Optional[int] = None
    comment_count: Optional[int] = None

    def to_json_dict(self) -> dict:
        d: dict = {
            "video_id": self.video_id,
            "channel_id": self.channel_id,
            "title": self.title,
            "description": self.description,
            "tags": list(self.tags),
            "duration_s": self.duration_s,
            "definition": self.definition,
            "caption_available": self.caption_available,
        }
        if self.published_at is not None:
            d["published_at"] = self.published_at.strftime("%Y-%m-%dT%H:%M:%SZ")
        for name in _COUNT_FIELDS:
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        return d


@dataclass(frozen=True)
class TranscriptSegment:
    text: str
    confidence: float

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass(frozen=True)
class TranscriptDoc:
    """Speech-to-text output for one video, with per-segment confidences."""

    video_id: str
    segments: tuple[TranscriptSegment, ...] = ()

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.segments)

    @property
    def confidence(self) -> float:
        """Overall confidence: per-segment values weighted by word count."""
        weights = [s.word_count for s in self.segments]
        total = sum(weights)
        if total == 0:
            return 0.0
        return sum(s.confidence * w for s, w in zip(self.segments, weights)) / total

    def to_json_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "segments": [
                {"text": s.text, "confidence": s.confidence} for s in self.segments
            ],
        }


@dataclass(frozen=True)
class OcrBlock:
    text: str
    confidence: float
    frame_time_s: float


@dataclass(frozen=True)
class OcrDoc:
    """On-screen text detections plus shot statistics for one video."""

    video_id: str
    blocks: tuple[OcrBlock, ...] = ()
    shot_count: int = 0
    shot_change_confidence: float = 0.0

    @property
    def text(self) -> str:
        return " ".join(b.text for b in self.blocks)

    @property
    def confidence(self) -> float:
        """Mean block confidence; 0.0 for a video with no detected text."""
        if not self.blocks:
            return 0.0
        return sum(b.confidence for b in self.blocks) / len(self.blocks)

    def to_json_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "blocks": [
                {"text": b.text, "confidence": b.confidence, "frame_time_s": b.frame_time_s}
                for b in self.blocks
            ],
            "shot_count": self.shot_count,
            "shot_change_confidence": self.shot_change_confidence,
        }


@dataclass(frozen=True)
class AnnotationLabels:
    """One rater's judgment of a video on the three binary criteria."""

    video_id: str
    medical_info_high: int
    understandable: int
    recommended: int
    annotator_id: str = ""

    def to_json_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "medical_info_high": self.medical_info_high,
            "understandable": self.understandable,
            "recommended": self.recommended,
            "annotator_id": self.annotator_id,
        }


@dataclass(frozen=True)
class LoadSummary:
    n_videos: int = 0
    n_transcripts: int = 0
    n_ocr: int = 0
    n_label_rows: int = 0
    n_labeled_videos: int = 0
    n_skipped_lines: int = 0

    @property
    def labels_empty(self) -> bool:
        return self.n_label_rows == 0

    def one_line(self) -> str:
        return (
            f"{self.n_videos} videos, {self.n_transcripts} transcripts, "
            f"{self.n_ocr} ocr, {self.n_label_rows} labels"
        )


@dataclass(frozen=True)
class CorpusStore:
    """Immutable bundle of all corpus maps, keyed by video id.

    ``labels`` holds one consolidated (majority-vote) record per video.
    """

    videos: Mapping[str, VideoRecord]
    transcripts: Mapping[str, TranscriptDoc]
    ocr: Mapping[str, OcrDoc]
    labels: Mapping[str, AnnotationLabels]
    summary: LoadSummary = field(default_factory=LoadSummary)

    def labeled_ids(self) -> list[str]:
        return sorted(self.labels)


def dedupe_ids(ids: Iterable[str]) -> list[str]:
    """Drop repeated ids, keeping the first occurrence of each in order."""
    seen: set[str] = set()
    out: list[str] = []
    for vid in ids:
        if vid not in seen:
            seen.add(vid)
            out.append(vid)
    return out


def _require_nonneg_int(obj: dict, key: str, default=None):
    value = obj.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{key} must be an integer, got {value!r}")
    if value < 0:
        raise SchemaError(f"{key} must be >= 0, got {value}")
    return value


def _check_confidence(value, what: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise SchemaError(f"{what} must lie in [0, 1], got {value}")
    return value


def _check_binary(obj: dict, key: str) -> int:
    value = obj.get(key)
    if value not in (0, 1):
        raise SchemaError(f"{key} must be 0 or 1, got {value!r}")
    return int(value)


def _loads_object(json_text: str) -> dict:
    try:
        obj = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.pos) from None
    if not isinstance(obj, dict):
        raise SchemaError(f"expected a JSON object, got {type(obj).__name__}")
    return obj


def _video_id_of(obj: dict) -> str:
    vid = obj.get("video_id")
    if not isinstance(vid, str) or not vid:
        raise SchemaError("missing or empty video_id")
    return vid


def parse_video_metadata(json_text: str) -> VideoRecord:
    """Parse one metadata object into a :class:`VideoRecord`.

    ``duration_s`` is accepted either as whole seconds or as an ISO-8601
    duration string. Engagement counts that are absent stay absent (``None``)
    rather than defaulting to zero, because a real zero is meaningful.
    """
    obj = _loads_object(json_text)
    vid = _video_id_of(obj)

    duration = obj.get("duration_s", 0)
    if isinstance(duration, str):
        duration = parse_iso_duration(duration)
    elif isinstance(duration, bool) or not isinstance(duration, int):
        raise SchemaError(f"duration_s must be an int or ISO-8601 string, got {duration!r}")
    if duration < 0:
        raise SchemaError(f"duration_s must be >= 0, got {duration}")

    definition = obj.get("definition", "sd")
    if definition not in ("sd", "hd"):
        raise SchemaError(f"definition must be 'sd' or 'hd', got {definition!r}")

    tags = obj.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise SchemaError(f"tags must be a list of strings, got {tags!r}")

    published = obj.get("published_at")
    return VideoRecord(
        video_id=vid,
        channel_id=str(obj.get("channel_id", "")),
        published_at=_parse_timestamp(published) if published is not None else None,
        title=str(obj.get("title", "")),
        description=str(obj.get("description", "")),
        tags=tuple(tags),
        duration_s=duration,
        definition=definition,
        caption_available=bool(obj.get("caption_available", False)),
        view_count=_require_nonneg_int(obj, "view_count"),
        like_count=_require_nonneg_int(obj, "like_count"),
        dislike_count=_require_nonneg_int(obj, "dislike_count"),
        comment_count=_require_nonneg_int(obj, "comment_count"),
    )


def parse_transcript(json_text: str) -> TranscriptDoc:
    obj = _loads_object(json_text)
    vid = _video_id_of(obj)
    segments = []
    for i, seg in enumerate(obj.get("segments", [])):
        if not isinstance(seg, dict):
            raise SchemaError(f"segment {i} must be an object")
        conf = _check_confidence(seg.get("confidence"), f"segment {i} confidence")
        segments.append(TranscriptSegment(text=str(seg.get("text", "")), confidence=conf))
    return TranscriptDoc(video_id=vid, segments=tuple(segments))


def parse_ocr(json_text: str) -> OcrDoc:
    obj = _loads_object(json_text)
    vid = _video_id_of(obj)
    blocks = []
    for i, blk in enumerate(obj.get("blocks", [])):
        if not isinstance(blk, dict):
            raise SchemaError(f"block {i} must be an object")
        conf = _check_confidence(blk.get("confidence"), f"block {i} confidence")
        frame_t = blk.get("frame_time_s", 0.0)
        if not isinstance(frame_t, (int, float)) or isinstance(frame_t, bool) or frame_t < 0:
            raise SchemaError(f"block {i} frame_time_s must be a non-negative number")
        blocks.append(OcrBlock(text=str(blk.get("text", "")), confidence=conf,
                               frame_time_s=float(frame_t)))
    shot_count = _require_nonneg_int(obj, "shot_count", default=0)
    shot_conf = _check_confidence(obj.get("shot_change_confidence", 0.0),
                                  "shot_change_confidence")
    return OcrDoc(video_id=vid, blocks=tuple(blocks), shot_count=shot_count,
                  shot_change_confidence=shot_conf)


def parse_labels(json_text: str) -> AnnotationLabels:
    obj = _loads_object(json_text)
    vid = _video_id_of(obj)
    return AnnotationLabels(
        video_id=vid,
        medical_info_high=_check_binary(obj, "medical_info_high"),
        understandable=_check_binary(obj, "understandable"),
        recommended=_check_binary(obj, "recommended"),
        annotator_id=str(obj.get("annotator_id", "")),
    )


def consolidate_labels(per_annotator: Sequence[AnnotationLabels]) -> AnnotationLabels:
    """Majority-vote each binary field across annotators of one video.

    An even split resolves to 0: on disagreement we deliberately do not
    credit a video with high information, understandability, or a
    recommendation.
    """
    if not per_annotator:
        raise SchemaError("consolidate_labels requires at least one annotation")
    ids = {a.video_id for a in per_annotator}
    if len(ids) != 1:
        raise SchemaError(f"annotations mix video ids: {sorted(ids)}")
    n = len(per_annotator)

    def vote(field_name: str) -> int:
        ones = sum(getattr(a, field_name) for a in per_annotator)
        return 1 if ones * 2 > n else 0

    return AnnotationLabels(
        video_id=per_annotator[0].video_id,
        medical_info_high=vote("medical_info_high"),
        understandable=vote("understandable"),
        recommended=vote("recommended"),
        annotator_id="consensus",
    )


def _read_jsonl(path: Path, parse_one):
    records = []
    skipped = 0
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        raise SchemaError(f"{path}: expected JSON Lines, found a JSON array")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            skipped += 1
            continue
        try:
            records.append(parse_one(line))
        except CorpusError as exc:
            # Keep the exception class (and any offset) but prefix the location.
            exc.args = (f"{path}:{lineno}: {exc}",)
            raise
    return records, skipped


def load_corpus(
    metadata_path, transcript_path, ocr_path, labels_path
) -> CorpusStore:
    """Load and cross-check the four corpus files into one store.

    Duplicate video ids in the metadata file and dangling ids in any other
    file are hard errors; the error message lists every offender. Label rows
    are consolidated to one majority-vote record per video.
    """
    metadata_path = Path(metadata_path)
    transcript_path = Path(transcript_path)
    ocr_path = Path(ocr_path)
    labels_path = Path(labels_path)
    for p in (metadata_path, transcript_path, ocr_path, labels_path):
        if not p.exists():
            raise FileNotFoundError(f"corpus file not found: {p}")

    video_rows, sk1 = _read_jsonl(metadata_path, parse_video_metadata)
    videos: dict[str, VideoRecord] = {}
    dupes = []
    for rec in video_rows:
        if rec.video_id in videos:
            dupes.append(rec.video_id)
        videos[rec.video_id] = rec
    if dupes:
        raise IntegrityError(f"duplicate video ids in {metadata_path}: {sorted(set(dupes))}")

    transcript_rows, sk2 = _read_jsonl(transcript_path, parse_transcript)
    ocr_rows, sk3 = _read_jsonl(ocr_path, parse_ocr)
    label_rows, sk4 = _read_jsonl(labels_path, parse_labels)

    dangling = sorted(
        {r.video_id for r in transcript_rows + ocr_rows + label_rows} - set(videos)
    )
    if dangling:
        raise IntegrityError(f"ids not present in {metadata_path}: {dangling}")

    transcripts: dict[str, TranscriptDoc] = {}
    for doc in transcript_rows:
        if doc.video_id in transcripts:
            raise IntegrityError(f"duplicate transcript for video {doc.video_id}")
        transcripts[doc.video_id] = doc
    ocr: dict[str, OcrDoc] = {}
    for doc in ocr_rows:
        if doc.video_id in ocr:
            raise IntegrityError(f"duplicate ocr document for video {doc.video_id}")
        ocr[doc.video_id] = doc

    by_video: dict[str, list[AnnotationLabels]] = {}
    for row in label_rows:
        by_video.setdefault(row.video_id, []).append(row)
    labels = {vid: consolidate_labels(rows) for vid, rows in by_video.items()}

    summary = LoadSummary(
        n_videos=len(videos),
        n_transcripts=len(transcripts),
        n_ocr=len(ocr),
        n_label_rows=len(label_rows),
        n_labeled_videos=len(labels),
        n_skipped_lines=sk1 + sk2 + sk3 + sk4,
    )
    return CorpusStore(videos=videos, transcripts=transcripts, ocr=ocr,
                       labels=labels, summary=summary)


def write_jsonl(path, records: Iterable) -> None:
    """Write records (anything with ``to_json_dict``) as one object per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True))
            fh.write("\n")


def flatten_api_response(json_text: str) -> list[VideoRecord]:
    """Flatten the raw metadata-list response of the public video-data API.

    The response shape is ``{"items": [{"id": ..., "snippet": {...},
    "contentDetails": {...}, "statistics": {...}}, ...]}``. Network access is
    out of scope here; callers fetch the JSON themselves and hand it over.
    """
    obj = _loads_object(json_text)
    items = obj.get("items")
    if not isinstance(items, list):
        raise SchemaError("API response has no 'items' list")
    records = []
    for item in items:
        if not isinstance(item, dict):
            raise SchemaError("API response item is not an object")
        vid = item.get("id")
        if isinstance(vid, dict):  # search responses nest the id
            vid = vid.get("videoId")
        snippet = item.get("snippet", {}) or {}
        content = item.get("contentDetails", {}) or {}
        stats = item.get("statistics", {}) or {}
        flat = {
            "video_id": vid,
            "channel_id": snippet.get("channelId", ""),
            "published_at": snippet.get("publishedAt"),
            "title": snippet.get("title", ""),
            "description": snippet.get("description", ""),
            "tags": snippet.get("tags", []),
            "duration_s": content.get("duration", 0),
            "definition": content.get("definition", "sd"),
            "caption_available": str(content.get("caption", "false")).lower() == "true",
        }
        for api_key, our_key in (
            ("viewCount", "view_count"),
            ("likeCount", "like_count"),
            ("dislikeCount", "dislike_count"),
            ("commentCount", "comment_count"),
        ):
            if api_key in stats:
                flat[our_key] = int(stats[api_key])
        records.append(parse_video_metadata(json.dumps(flat)))
    return records
