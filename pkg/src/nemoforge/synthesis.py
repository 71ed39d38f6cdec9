"""Montage composition: embed a target scene among unrelated negatives.

Negatives are drawn seeded and without replacement from the candidate
pool, accumulated greedily until the montage first reaches the duration
hint, and the target is placed uniformly over the gap positions between
them. Candidates that would push the montage out of its duration class
are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from .core import ClipSegment, DurationClass, Montage, TimeInterval, classify_duration
from .errors import (
    ContaminationError,
    NemoforgeError,
    NotFoundError,
    PoolExhaustedError,
    RecordValidationError,
    ResolverError,
)
from .representation import MIN_TARGET_SCENE_LENGTH, ObjectTable, SceneTable
from .seeding import derive_rng, stable_digest

LONG_MONTAGE_CAP = 4080.0

# (inclusive_lower, inclusive_upper) duration bounds per class; SHORT's lower
# bound is open at 0 and its upper bound is open at 150.
_CLASS_BOUNDS = {
    DurationClass.SHORT: (0.0, 150.0),
    DurationClass.MEDIUM: (150.0, 900.0),
    DurationClass.LONG: (900.0, LONG_MONTAGE_CAP),
}


class PlacementPolicy(str, Enum):
    RANDOM_POSITION = "RANDOM_POSITION"


def class_bounds(target_class: DurationClass) -> tuple[float, float]:
    """Hint-sampling bounds for a duration class; LONG is capped at 4080s."""
    return _CLASS_BOUNDS[target_class]


def _hint_in_class(target_class: DurationClass, hint: float) -> bool:
    lo, hi = _CLASS_BOUNDS[target_class]
    if target_class == DurationClass.SHORT:
        return 0.0 < hint < hi
    if target_class == DurationClass.MEDIUM:
        return lo <= hint <= hi
    return lo < hint <= hi


@dataclass(frozen=True)
class SynthesisConfig:
    """Seeded recipe for one composition."""

    seed: int
    target_class: DurationClass
    target_duration_hint: float
    placement: PlacementPolicy = PlacementPolicy.RANDOM_POSITION

    def __post_init__(self):
        if not _hint_in_class(self.target_class, self.target_duration_hint):
            raise RecordValidationError(
                f"duration hint {self.target_duration_hint} escapes the "
                f"{self.target_class.value} bounds"
            )

    @classmethod
    def sample(cls, seed: int, target_class: DurationClass) -> "SynthesisConfig":
        """Draw a duration hint uniformly within the class bounds."""
        rng = derive_rng(seed, "duration-hint", target_class.value)
        lo, hi = _CLASS_BOUNDS[target_class]
        hint = rng.uniform(lo, hi)
        # uniform() can return either endpoint; nudge open boundaries inward
        if not _hint_in_class(target_class, hint):
            hint = (lo + hi) / 2
        return cls(seed=seed, target_class=target_class, target_duration_hint=hint)


def _segment_for(scene: SceneTable) -> ClipSegment:
    return ClipSegment(
        source_video_id=scene.source_video_id,
        scene_id=scene.scene_id,
        source_interval=scene.source_interval,
    )


def compose_montage(
    target: tuple[SceneTable, ObjectTable],
    negatives: Sequence[SceneTable],
    cfg: SynthesisConfig,
) -> tuple[Montage, TimeInterval]:
    """Compose one montage around a target scene.

    Returns the montage and the target's montage-time interval. Raises
    ContaminationError if any pool candidate carries the target object's
    tag, and PoolExhaustedError if the pool cannot reach the class's
    duration bounds.
    """
    target_scene, target_object = target
    if target_scene.length <= MIN_TARGET_SCENE_LENGTH:
        raise NemoforgeError(
            f"target scene {target_scene.scene_id} is {target_scene.length}s, "
            f"needs more than {MIN_TARGET_SCENE_LENGTH}s"
        )
    for scene in negatives:
        if scene.has_tag(target_object.tag):
            raise ContaminationError(
                f"negative scene {scene.scene_id} carries target tag {target_object.tag!r}"
            )
        if scene.length <= 0:
            raise RecordValidationError(f"negative scene {scene.scene_id} has non-positive length")

    rng = derive_rng(cfg.seed, "compose", target_scene.scene_id)
    order = rng.sample(list(negatives), len(negatives))

    lo, hi = _CLASS_BOUNDS[cfg.target_class]
    selected: list[SceneTable] = []
    total = target_scene.length
    for candidate in order:
        if total >= cfg.target_duration_hint:
            break
        grown = total + candidate.length
        # skip candidates that would push the montage past its class
        if cfg.target_class == DurationClass.SHORT and grown >= hi:
            continue
        if cfg.target_class != DurationClass.SHORT and grown > hi:
            continue
        selected.append(candidate)
        total = grown

    if classify_duration(total) != cfg.target_class:
        raise PoolExhaustedError(
            f"pool of {len(negatives)} negatives reaches only {total}s, "
            f"not the {cfg.target_class.value} bounds"
        )

    slot = rng.randint(0, len(selected))
    segments = [_segment_for(s) for s in selected[:slot]]
    segments.append(_segment_for(target_scene))
    segments.extend(_segment_for(s) for s in selected[slot:])

    montage_id = "mtg-" + stable_digest(
        cfg.seed, cfg.target_class.value, cfg.target_duration_hint,
        target_scene.scene_id, target_object.object_id,
    )
    montage = Montage.build(montage_id, segments)
    offset = 0.0
    for seg in montage.segments[:slot]:
        offset += seg.length
    needle = TimeInterval(offset, offset + target_scene.length)
    return montage, needle


def needle_interval_in_montage(montage: Montage, scene_id: str) -> list[TimeInterval]:
    """Montage-time intervals of every segment drawn from `scene_id`.

    Sorted ascending; raises NotFoundError when the scene is absent.
    """
    out = []
    offset = 0.0
    for seg in montage.segments:
        end = offset + seg.length
        if seg.scene_id == scene_id:
            out.append(TimeInterval(offset, end))
        offset = end
    if not out:
        raise NotFoundError(f"scene {scene_id} is not part of montage {montage.montage_id}")
    return out


def _format_seconds(value: float) -> str:
    """Shortest round-trip decimal rendering of a timestamp."""
    return repr(float(value))


def emit_concat_manifest(
    montage: Montage,
    path_resolver: Callable[[str], str] | Mapping[str, str],
) -> str:
    """Render the montage as a concat manifest: file/inpoint/outpoint per segment."""
    if not montage.segments:
        raise RecordValidationError(f"montage {montage.montage_id} has no segments")
    if isinstance(path_resolver, Mapping):
        mapping = path_resolver
        path_resolver = lambda vid: mapping[vid]
    lines = []
    for seg in montage.segments:
        try:
            path = path_resolver(seg.source_video_id)
        except KeyError as exc:
            raise ResolverError(f"no media path for source video {seg.source_video_id}") from exc
        lines.append(f"file {path}")
        lines.append(f"inpoint {_format_seconds(seg.source_interval.start)}")
        lines.append(f"outpoint {_format_seconds(seg.source_interval.end)}")
    return "\n".join(lines) + "\n"
