"""Tabular video representations: scene and object tables per source video.

A corpus directory holds a videos.jsonl index with one row per source
video ({source_video_id, program_id, duration}) and one subdirectory per
video containing scenes.jsonl and objects.jsonl.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .core import TimeInterval
from .errors import NotFoundError, RecordValidationError, ReferentialIntegrityError
from .jsonl import read_records, write_records


@dataclass(frozen=True)
class TrackPoint:
    """One sampled detection: timestamp plus a normalized (x, y, w, h) box."""

    timestamp: float
    box: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(float(v) for v in self.box))
        if len(self.box) != 4:
            raise RecordValidationError(f"track box must have 4 coords, got {len(self.box)}")
        x, y, w, h = self.box
        for name, v in zip("xywh", self.box):
            if not (0.0 <= v <= 1.0):
                raise RecordValidationError(f"track box {name}={v} escapes [0, 1]")
        if w * h > 1.0:
            raise RecordValidationError(f"track box area {w * h} exceeds 1")

    @property
    def area(self) -> float:
        return self.box[2] * self.box[3]

    def to_json_dict(self) -> dict:
        return {"timestamp": self.timestamp, "box": list(self.box)}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "TrackPoint":
        return cls(timestamp=data["timestamp"], box=tuple(data["box"]))


@dataclass(frozen=True)
class ObjectTable:
    """One tracked object within a scene.

    visibility_interval and track timestamps are scene-local seconds.
    """

    object_id: str
    scene_id: str
    visibility_interval: TimeInterval
    tag: str
    referring_expression: str
    track: tuple[TrackPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "track", tuple(self.track))
        if not self.object_id:
            raise RecordValidationError("object_id must be non-empty")
        if not self.tag:
            raise RecordValidationError(f"object {self.object_id} has an empty tag")
        prev = None
        for point in self.track:
            if not (self.visibility_interval.start <= point.timestamp <= self.visibility_interval.end):
                raise RecordValidationError(
                    f"object {self.object_id} track timestamp {point.timestamp} escapes "
                    f"visibility [{self.visibility_interval.start}, {self.visibility_interval.end}]"
                )
            if prev is not None and point.timestamp <= prev:
                raise RecordValidationError(
                    f"object {self.object_id} track timestamps must strictly increase "
                    f"({prev} then {point.timestamp})"
                )
            prev = point.timestamp

    @property
    def visibility_length(self) -> float:
        return self.visibility_interval.length

    @property
    def mean_visible_area(self) -> float:
        """Arithmetic mean of per-sample box areas; 0.0 for an empty track."""
        if not self.track:
            return 0.0
        return sum(p.area for p in self.track) / len(self.track)

    def to_json_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "scene_id": self.scene_id,
            "visibility_interval": self.visibility_interval.to_json_dict(),
            "tag": self.tag,
            "referring_expression": self.referring_expression,
            "track": [p.to_json_dict() for p in self.track],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "ObjectTable":
        try:
            return cls(
                object_id=data["object_id"],
                scene_id=data["scene_id"],
                visibility_interval=TimeInterval.from_json_dict(data["visibility_interval"]),
                tag=data["tag"],
                referring_expression=data.get("referring_expression", ""),
                track=tuple(TrackPoint.from_json_dict(p) for p in data.get("track", [])),
            )
        except KeyError as exc:
            raise RecordValidationError(f"object record missing field {exc}") from exc


@dataclass(frozen=True)
class SceneTable:
    """One scene of a source video with its object inventory."""

    scene_id: str
    source_video_id: str
    source_interval: TimeInterval
    subtitles: str
    object_tags: frozenset[str]
    object_table_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "object_tags", frozenset(self.object_tags))
        object.__setattr__(self, "object_table_ids", tuple(self.object_table_ids))
        if not self.scene_id:
            raise RecordValidationError("scene_id must be non-empty")
        if not self.source_video_id:
            raise RecordValidationError(f"scene {self.scene_id} has an empty source_video_id")

    @property
    def length(self) -> float:
        return self.source_interval.length

    def has_tag(self, tag: str) -> bool:
        """Exact tag membership, case-insensitive."""
        needle = tag.casefold()
        return any(t.casefold() == needle for t in self.object_tags)

    def to_json_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "source_video_id": self.source_video_id,
            "source_interval": self.source_interval.to_json_dict(),
            "subtitles": self.subtitles,
            "object_tags": sorted(self.object_tags),
            "object_table_ids": list(self.object_table_ids),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "SceneTable":
        try:
            return cls(
                scene_id=data["scene_id"],
                source_video_id=data["source_video_id"],
                source_interval=TimeInterval.from_json_dict(data["source_interval"]),
                subtitles=data.get("subtitles", ""),
                object_tags=frozenset(data.get("object_tags", [])),
                object_table_ids=tuple(data.get("object_table_ids", [])),
            )
        except KeyError as exc:
            raise RecordValidationError(f"scene record missing field {exc}") from exc


@dataclass(frozen=True)
class VideoRepresentation:
    """All scene and object tables of one source video."""

    source_video_id: str
    program_id: str
    scenes: tuple[SceneTable, ...]
    objects: tuple[ObjectTable, ...]
    duration: float | None = None
    _objects_by_id: Mapping[str, ObjectTable] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scenes", tuple(self.scenes))
        object.__setattr__(self, "objects", tuple(self.objects))
        by_id = {}
        for obj in self.objects:
            if obj.object_id in by_id:
                raise RecordValidationError(f"duplicate object_id {obj.object_id}")
            by_id[obj.object_id] = obj
        object.__setattr__(self, "_objects_by_id", by_id)
        self._validate()

    def _validate(self):
        scene_ids = set()
        spans: list[tuple[float, float, str]] = []
        for scene in self.scenes:
            if scene.source_video_id != self.source_video_id:
                raise RecordValidationError(
                    f"scene {scene.scene_id} belongs to {scene.source_video_id}, "
                    f"not {self.source_video_id}"
                )
            if scene.scene_id in scene_ids:
                raise RecordValidationError(f"duplicate scene_id {scene.scene_id}")
            scene_ids.add(scene.scene_id)
            if self.duration is not None and scene.source_interval.end > self.duration:
                raise RecordValidationError(
                    f"scene {scene.scene_id} ends at {scene.source_interval.end}, "
                    f"beyond video duration {self.duration}"
                )
            spans.append((scene.source_interval.start, scene.source_interval.end, scene.scene_id))
            scene_tags = {t.casefold() for t in scene.object_tags}
            for oid in scene.object_table_ids:
                obj = self._objects_by_id.get(oid)
                if obj is None:
                    raise ReferentialIntegrityError(
                        f"scene {scene.scene_id} references unknown object {oid}"
                    )
                if obj.scene_id != scene.scene_id:
                    raise ReferentialIntegrityError(
                        f"scene {scene.scene_id} references object {oid} of scene {obj.scene_id}"
                    )
                if obj.tag.casefold() not in scene_tags:
                    raise RecordValidationError(
                        f"scene {scene.scene_id} object_tags miss tag {obj.tag!r} of object {oid}"
                    )
                if obj.visibility_interval.end > scene.length:
                    raise RecordValidationError(
                        f"object {oid} visibility ends at {obj.visibility_interval.end}, "
                        f"beyond scene {scene.scene_id} length {scene.length}"
                    )
        for obj in self.objects:
            if obj.scene_id not in scene_ids:
                raise ReferentialIntegrityError(
                    f"object {obj.object_id} references unknown scene {obj.scene_id}"
                )
        spans.sort()
        for (s1, e1, id1), (s2, e2, id2) in zip(spans, spans[1:]):
            if s2 < e1:
                raise RecordValidationError(
                    f"scenes {id1} and {id2} overlap in source time ([{s1}, {e1}] vs [{s2}, {e2}])"
                )

    def object_by_id(self, object_id: str) -> ObjectTable:
        obj = self._objects_by_id.get(object_id)
        if obj is None:
            raise NotFoundError(f"no object {object_id} in video {self.source_video_id}")
        return obj

    def objects_for(self, scene: SceneTable) -> list[ObjectTable]:
        return [self.object_by_id(oid) for oid in scene.object_table_ids]

    def scene_by_id(self, scene_id: str) -> SceneTable:
        for scene in self.scenes:
            if scene.scene_id == scene_id:
                return scene
        raise NotFoundError(f"no scene {scene_id} in video {self.source_video_id}")


MIN_PROMINENT_VISIBILITY = 4.0
PROMINENT_AREA_RANGE = (0.05, 0.25)
MIN_TARGET_SCENE_LENGTH = 5.0


def prominent_objects(scene: SceneTable, rep: VideoRepresentation) -> list[ObjectTable]:
    """Objects of a scene visible >= 4s with mean box area in [0.05, 0.25]."""
    lo, hi = PROMINENT_AREA_RANGE
    out = []
    for obj in rep.objects_for(scene):
        if obj.visibility_length < MIN_PROMINENT_VISIBILITY:
            continue
        if not (lo <= obj.mean_visible_area <= hi):
            continue
        out.append(obj)
    return out


def eligible_target_scenes(rep: VideoRepresentation) -> list[tuple[SceneTable, ObjectTable]]:
    """(scene, object) pairs usable as needle targets.

    A scene qualifies when strictly longer than 5s; each of its prominent
    objects yields one pair. Ordered by (scene_id, object_id).
    """
    pairs = []
    for scene in rep.scenes:
        if scene.length <= MIN_TARGET_SCENE_LENGTH:
            continue
        for obj in prominent_objects(scene, rep):
            pairs.append((scene, obj))
    pairs.sort(key=lambda pair: (pair[0].scene_id, pair[1].object_id))
    return pairs


def scenes_without_tag(
    rep_pool: Sequence[VideoRepresentation],
    tag: str,
    same_video_only: bool,
    target_video_id: str,
) -> list[SceneTable]:
    """Negative candidates: scenes whose object tags exclude `tag`.

    With same_video_only the pool is restricted to the target's source
    video; otherwise to videos sharing the target's program_id. Tag
    comparison is exact and case-insensitive.
    """
    by_id = {rep.source_video_id: rep for rep in rep_pool}
    target_rep = by_id.get(target_video_id)
    if target_rep is None:
        raise NotFoundError(f"target video {target_video_id} is not in the pool")
    out = []
    for rep in rep_pool:
        if same_video_only:
            if rep.source_video_id != target_video_id:
                continue
        elif rep.program_id != target_rep.program_id:
            continue
        for scene in rep.scenes:
            if not scene.has_tag(tag):
                out.append(scene)
    return out


def load_representation(video_dir: str | os.PathLike, program_id: str = "", duration: float | None = None) -> VideoRepresentation:
    """Load one video's scenes.jsonl and objects.jsonl from its directory."""
    video_dir = Path(video_dir)
    scenes_path = video_dir / "scenes.jsonl"
    objects_path = video_dir / "objects.jsonl"
    if not scenes_path.exists():
        raise NotFoundError(f"no scenes.jsonl under {video_dir}")
    scenes = [SceneTable.from_json_dict(rec) for _, rec in read_records(scenes_path)]
    objects = []
    if objects_path.exists():
        objects = [ObjectTable.from_json_dict(rec) for _, rec in read_records(objects_path)]
    if not scenes:
        raise RecordValidationError(f"{scenes_path} holds no scenes")
    video_ids = {s.source_video_id for s in scenes}
    if len(video_ids) != 1:
        raise RecordValidationError(f"{scenes_path} mixes source videos: {sorted(video_ids)}")
    return VideoRepresentation(
        source_video_id=scenes[0].source_video_id,
        program_id=program_id,
        scenes=tuple(scenes),
        objects=tuple(objects),
        duration=duration,
    )


def load_corpus(root: str | os.PathLike) -> list[VideoRepresentation]:
    """Load every video listed in <root>/videos.jsonl, in index order."""
    root = Path(root)
    index_path = root / "videos.jsonl"
    if not index_path.exists():
        raise NotFoundError(f"no videos.jsonl under {root}")
    reps = []
    for line_no, rec in read_records(index_path):
        try:
            video_id = rec["source_video_id"]
            program_id = rec["program_id"]
            duration = rec["duration"]
        except KeyError as exc:
            raise RecordValidationError(f"{index_path}:{line_no}: index row missing field {exc}") from exc
        rep = load_representation(root / video_id, program_id=program_id, duration=duration)
        if rep.source_video_id != video_id:
            raise ReferentialIntegrityError(
                f"{index_path}:{line_no}: directory {video_id} holds scenes of {rep.source_video_id}"
            )
        reps.append(rep)
    return reps


def dump_representation(rep: VideoRepresentation, video_dir: str | os.PathLike) -> None:
    """Write one video's tables back to scenes.jsonl and objects.jsonl."""
    video_dir = Path(video_dir)
    video_dir.mkdir(parents=True, exist_ok=True)
    write_records(video_dir / "scenes.jsonl", (s.to_json_dict() for s in rep.scenes))
    write_records(video_dir / "objects.jsonl", (o.to_json_dict() for o in rep.objects))


def dump_corpus(reps: Sequence[VideoRepresentation], root: str | os.PathLike) -> None:
    """Write a corpus directory: videos.jsonl index plus per-video tables."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    write_records(
        root / "videos.jsonl",
        (
            {
                "source_video_id": rep.source_video_id,
                "program_id": rep.program_id,
                "duration": rep.duration if rep.duration is not None else max(
                    (s.source_interval.end for s in rep.scenes), default=0.0
                ),
            }
            for rep in reps
        ),
    )
    for rep in reps:
        dump_representation(rep, root / rep.source_video_id)
