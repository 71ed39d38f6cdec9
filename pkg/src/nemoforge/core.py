"""Core data model: time intervals, duration classes, montages, QA records.

All times are real seconds. Montage time starts at 0.0 at the first
segment; segment offsets are prefix sums of segment lengths, so the
stored total_duration always equals the re-derived sum exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import InvalidDurationError, InvalidIntervalError, RecordValidationError

SHORT_MEDIUM_BOUNDARY = 150.0
MEDIUM_LONG_BOUNDARY = 900.0


class DurationClass(str, Enum):
    SHORT = "SHORT"
    MEDIUM = "MEDIUM"
    LONG = "LONG"


class NeedleType(str, Enum):
    OBJECT = "OBJECT"
    SCENE = "SCENE"


class NeedleCountClass(str, Enum):
    SINGLE = "SINGLE"
    MULTI = "MULTI"


class Provenance(str, Enum):
    GENERATED = "GENERATED"
    EXPANDED = "EXPANDED"
    CLEANED = "CLEANED"


def classify_duration(duration_seconds: float) -> DurationClass:
    """Bucket a montage duration: <150s SHORT, 150-900s MEDIUM, >900s LONG.

    Both boundaries close on MEDIUM. Non-positive or non-finite durations
    are invalid.
    """
    if not isinstance(duration_seconds, (int, float)) or isinstance(duration_seconds, bool):
        raise InvalidDurationError(f"duration must be a number, got {type(duration_seconds).__name__}")
    d = float(duration_seconds)
    if not math.isfinite(d) or d <= 0.0:
        raise InvalidDurationError(f"duration must be finite and positive, got {duration_seconds!r}")
    if d < SHORT_MEDIUM_BOUNDARY:
        return DurationClass.SHORT
    if d <= MEDIUM_LONG_BOUNDARY:
        return DurationClass.MEDIUM
    return DurationClass.LONG


def validate_interval(start: float, end: float) -> None:
    """Check that [start, end] is a well-formed non-negative interval.

    Degenerate intervals (start == end) are allowed.
    """
    for name, value in (("start", start), ("end", end)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidIntervalError(f"{name} must be a number, got {type(value).__name__}")
        if not math.isfinite(float(value)):
            raise InvalidIntervalError(f"{name} must be finite, got {value!r}")
    if start < 0 or end < 0:
        raise InvalidIntervalError(f"interval must be non-negative, got [{start}, {end}]")
    if start > end:
        raise InvalidIntervalError(f"interval start must not exceed end, got [{start}, {end}]")


@dataclass(frozen=True)
class TimeInterval:
    """A closed interval [start, end] in seconds; degenerate allowed."""

    start: float
    end: float

    def __post_init__(self):
        validate_interval(self.start, self.end)
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))

    @property
    def length(self) -> float:
        return self.end - self.start

    def to_json_dict(self) -> dict:
        return {"start": self.start, "end": self.end}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "TimeInterval":
        try:
            return cls(start=data["start"], end=data["end"])
        except KeyError as exc:
            raise RecordValidationError(f"interval record missing field {exc}") from exc


def check_sorted_disjoint(intervals: Sequence[TimeInterval], what: str) -> None:
    """Require intervals sorted ascending and pairwise non-overlapping."""
    for prev, cur in zip(intervals, intervals[1:]):
        if cur.start < prev.end:
            raise RecordValidationError(
                f"{what} must be sorted and disjoint, got [{prev.start}, {prev.end}] then [{cur.start}, {cur.end}]"
            )


@dataclass(frozen=True)
class ClipSegment:
    """One montage segment: a sub-interval of a source video's timeline."""

    source_video_id: str
    scene_id: str
    source_interval: TimeInterval

    @property
    def length(self) -> float:
        return self.source_interval.length

    def to_json_dict(self) -> dict:
        return {
            "source_video_id": self.source_video_id,
            "scene_id": self.scene_id,
            "source_interval": self.source_interval.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "ClipSegment":
        try:
            return cls(
                source_video_id=data["source_video_id"],
                scene_id=data["scene_id"],
                source_interval=TimeInterval.from_json_dict(data["source_interval"]),
            )
        except KeyError as exc:
            raise RecordValidationError(f"segment record missing field {exc}") from exc


def _sum_segment_lengths(segments: Sequence[ClipSegment]) -> float:
    total = 0.0
    for seg in segments:
        total += seg.length
    return total


@dataclass(frozen=True)
class Montage:
    """An ordered concatenation of clip segments plus needle annotations.

    needle_intervals maps qa_id to that QA's ground-truth intervals in
    montage time, sorted ascending and disjoint.
    """

    montage_id: str
    segments: tuple[ClipSegment, ...]
    total_duration: float
    needle_intervals: Mapping[str, tuple[TimeInterval, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.montage_id:
            raise RecordValidationError("montage_id must be non-empty")
        segments = tuple(self.segments)
        object.__setattr__(self, "segments", segments)
        if not segments:
            raise RecordValidationError(f"montage {self.montage_id} has no segments")
        for seg in segments:
            if seg.length <= 0:
                raise RecordValidationError(
                    f"montage {self.montage_id} segment {seg.scene_id} has non-positive length"
                )
        derived = _sum_segment_lengths(segments)
        if derived != self.total_duration:
            raise RecordValidationError(
                f"montage {self.montage_id} total_duration {self.total_duration} "
                f"does not equal the segment length sum {derived}"
            )
        needles = {qa_id: tuple(ivs) for qa_id, ivs in dict(self.needle_intervals).items()}
        object.__setattr__(self, "needle_intervals", needles)
        for qa_id, intervals in needles.items():
            if not intervals:
                raise RecordValidationError(f"montage {self.montage_id} qa {qa_id} has no needle intervals")
            for iv in intervals:
                if iv.start < 0 or iv.end > self.total_duration:
                    raise RecordValidationError(
                        f"montage {self.montage_id} qa {qa_id} needle [{iv.start}, {iv.end}] "
                        f"escapes [0, {self.total_duration}]"
                    )
            check_sorted_disjoint(intervals, f"montage {self.montage_id} qa {qa_id} needles")

    @classmethod
    def build(
        cls,
        montage_id: str,
        segments: Iterable[ClipSegment],
        needle_intervals: Mapping[str, Sequence[TimeInterval]] | None = None,
    ) -> "Montage":
        """Construct a montage, deriving total_duration from the segments."""
        segments = tuple(segments)
        needles = {qa_id: tuple(ivs) for qa_id, ivs in (needle_intervals or {}).items()}
        return cls(
            montage_id=montage_id,
            segments=segments,
            total_duration=_sum_segment_lengths(segments),
            needle_intervals=needles,
        )

    def segment_intervals(self) -> list[TimeInterval]:
        """Montage-time interval of each segment, by prefix sums."""
        out = []
        offset = 0.0
        for seg in self.segments:
            end = offset + seg.length
            out.append(TimeInterval(offset, end))
            offset = end
        return out

    def with_needle_intervals(self, qa_id: str, intervals: Sequence[TimeInterval]) -> "Montage":
        """A copy of this montage with one QA's needle intervals attached."""
        needles = dict(self.needle_intervals)
        needles[qa_id] = tuple(intervals)
        return Montage(
            montage_id=self.montage_id,
            segments=self.segments,
            total_duration=self.total_duration,
            needle_intervals=needles,
        )

    @property
    def duration_class(self) -> DurationClass:
        return classify_duration(self.total_duration)

    def to_json_dict(self) -> dict:
        return {
            "montage_id": self.montage_id,
            "segments": [seg.to_json_dict() for seg in self.segments],
            "total_duration": self.total_duration,
            "needle_intervals": {
                qa_id: [iv.to_json_dict() for iv in ivs]
                for qa_id, ivs in sorted(self.needle_intervals.items())
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Montage":
        try:
            return cls(
                montage_id=data["montage_id"],
                segments=tuple(ClipSegment.from_json_dict(s) for s in data["segments"]),
                total_duration=data["total_duration"],
                needle_intervals={
                    qa_id: tuple(TimeInterval.from_json_dict(iv) for iv in ivs)
                    for qa_id, ivs in data.get("needle_intervals", {}).items()
                },
            )
        except KeyError as exc:
            raise RecordValidationError(f"montage record missing field {exc}") from exc


def needle_count_class_for(ground_truth: Sequence[TimeInterval]) -> NeedleCountClass:
    return NeedleCountClass.SINGLE if len(ground_truth) == 1 else NeedleCountClass.MULTI


@dataclass(frozen=True)
class NeedleGroundingQA:
    """One question with its ground-truth needle intervals in montage time."""

    qa_id: str
    montage_id: str
    needle_type: NeedleType
    question: str
    ground_truth: tuple[TimeInterval, ...]
    duration_class: DurationClass
    needle_count_class: NeedleCountClass
    target_object_tag: str | None = None
    provenance: Provenance = Provenance.GENERATED
    parent_qa_id: str | None = None

    def __post_init__(self):
        if not self.qa_id:
            raise RecordValidationError("qa_id must be non-empty")
        if not self.question or not self.question.strip():
            raise RecordValidationError(f"qa {self.qa_id} has an empty question")
        gt = tuple(self.ground_truth)
        object.__setattr__(self, "ground_truth", gt)
        if not gt:
            raise RecordValidationError(f"qa {self.qa_id} has empty ground_truth")
        check_sorted_disjoint(gt, f"qa {self.qa_id} ground_truth")
        expected = needle_count_class_for(gt)
        if self.needle_count_class != expected:
            raise RecordValidationError(
                f"qa {self.qa_id} needle_count_class {self.needle_count_class.value} "
                f"does not match {len(gt)} ground-truth interval(s)"
            )

    def check_against(self, montage: Montage) -> None:
        """Validate this QA's intervals and class against its montage."""
        if montage.montage_id != self.montage_id:
            raise RecordValidationError(
                f"qa {self.qa_id} references montage {self.montage_id}, got {montage.montage_id}"
            )
        for iv in self.ground_truth:
            if iv.start < 0 or iv.end > montage.total_duration:
                raise RecordValidationError(
                    f"qa {self.qa_id} ground truth [{iv.start}, {iv.end}] escapes "
                    f"[0, {montage.total_duration}]"
                )
        if classify_duration(montage.total_duration) != self.duration_class:
            raise RecordValidationError(
                f"qa {self.qa_id} duration_class {self.duration_class.value} does not match "
                f"montage duration {montage.total_duration}"
            )

    def to_json_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "montage_id": self.montage_id,
            "needle_type": self.needle_type.value,
            "question": self.question,
            "ground_truth": [iv.to_json_dict() for iv in self.ground_truth],
            "duration_class": self.duration_class.value,
            "needle_count_class": self.needle_count_class.value,
            "target_object_tag": self.target_object_tag,
            "provenance": self.provenance.value,
            "parent_qa_id": self.parent_qa_id,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "NeedleGroundingQA":
        try:
            return cls(
                qa_id=data["qa_id"],
                montage_id=data["montage_id"],
                needle_type=NeedleType(data["needle_type"]),
                question=data["question"],
                ground_truth=tuple(TimeInterval.from_json_dict(iv) for iv in data["ground_truth"]),
                duration_class=DurationClass(data["duration_class"]),
                needle_count_class=NeedleCountClass(data["needle_count_class"]),
                target_object_tag=data.get("target_object_tag"),
                provenance=Provenance(data.get("provenance", Provenance.GENERATED.value)),
                parent_qa_id=data.get("parent_qa_id"),
            )
        except KeyError as exc:
            raise RecordValidationError(f"qa record missing field {exc}") from exc
        except ValueError as exc:
            raise RecordValidationError(f"qa record has invalid enum value: {exc}") from exc
