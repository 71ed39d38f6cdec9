"""Dataset expansion: longer montages, extra questions, multi-needle splits.

Expanded items are new records with fresh ids; lineage is recorded via
provenance=EXPANDED and parent_qa_id. Question text never changes during
expansion.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .clients import CompletionClient, RetryPolicy
from .core import (
    ClipSegment,
    DurationClass,
    Montage,
    NeedleCountClass,
    NeedleGroundingQA,
    Provenance,
    TimeInterval,
    classify_duration,
)
from .errors import ContaminationError, IneligibleError, NemoforgeError, NotFoundError
from .qa_gen import generate_qa
from .representation import ObjectTable, SceneTable, VideoRepresentation, scenes_without_tag
from .seeding import derive_rng, derive_seed, stable_digest
from .synthesis import SynthesisConfig, compose_montage, needle_interval_in_montage

_CLASS_ORDER = {DurationClass.SHORT: 0, DurationClass.MEDIUM: 1, DurationClass.LONG: 2}

MIN_SPLIT_SCENE_LENGTH = 6.0
MIN_SPLIT_VISIBILITY = 6.0
MIN_PIECE_LENGTH = 2.0

# cut positions snap to this dyadic grid so piece lengths stay exactly
# representable and telescope back to the original length
_CUT_GRID = 2.0 ** -20
_MAX_CUT_TRIES = 1000


def _locate_target_segment(qa: NeedleGroundingQA, montage: Montage) -> int:
    """Index of the segment whose montage interval is the QA's ground truth."""
    if len(qa.ground_truth) != 1:
        raise IneligibleError("single-needle", f"qa {qa.qa_id} has {len(qa.ground_truth)} needles")
    needle = qa.ground_truth[0]
    offset = 0.0
    for i, seg in enumerate(montage.segments):
        end = offset + seg.length
        if math.isclose(offset, needle.start, abs_tol=1e-9) and math.isclose(end, needle.end, abs_tol=1e-9):
            return i
        offset = end
    raise NotFoundError(
        f"qa {qa.qa_id} ground truth [{needle.start}, {needle.end}] matches no segment "
        f"of montage {montage.montage_id}"
    )


def extend_montage(
    qa: NeedleGroundingQA,
    montage: Montage,
    pool: Sequence[VideoRepresentation],
    target_class: DurationClass,
    seed: int,
) -> tuple[Montage, NeedleGroundingQA]:
    """Rebuild a QA's montage at a longer duration class.

    MEDIUM extensions draw negatives from the target's source video only;
    LONG extensions may draw from the whole program pool. The question
    text and needle length are preserved.
    """
    if _CLASS_ORDER[target_class] <= _CLASS_ORDER[qa.duration_class]:
        raise IneligibleError(
            "class-order",
            f"target class {target_class.value} is not longer than {qa.duration_class.value}",
        )
    if not qa.target_object_tag:
        raise NemoforgeError(f"qa {qa.qa_id} has no target_object_tag to filter negatives with")

    seg = montage.segments[_locate_target_segment(qa, montage)]
    rep = next((r for r in pool if r.source_video_id == seg.source_video_id), None)
    if rep is None:
        raise NotFoundError(f"pool has no representation for video {seg.source_video_id}")
    scene = rep.scene_by_id(seg.scene_id)
    tag = qa.target_object_tag
    candidates = [
        rep.object_by_id(oid)
        for oid in scene.object_table_ids
        if rep.object_by_id(oid).tag.casefold() == tag.casefold()
    ]
    if not candidates:
        raise NotFoundError(f"scene {scene.scene_id} has no object tagged {tag!r}")
    obj = min(candidates, key=lambda o: o.object_id)

    negatives = scenes_without_tag(
        pool,
        tag,
        same_video_only=(target_class == DurationClass.MEDIUM),
        target_video_id=seg.source_video_id,
    )
    cfg = SynthesisConfig.sample(derive_seed(seed, "extend", qa.qa_id, target_class.value), target_class)
    new_montage, needle = compose_montage((scene, obj), negatives, cfg)

    new_qa_id = "qa-" + stable_digest(qa.qa_id, "extend", target_class.value) + "-ext"
    new_montage = new_montage.with_needle_intervals(new_qa_id, (needle,))
    new_qa = NeedleGroundingQA(
        qa_id=new_qa_id,
        montage_id=new_montage.montage_id,
        needle_type=qa.needle_type,
        question=qa.question,
        ground_truth=(needle,),
        duration_class=target_class,
        needle_count_class=NeedleCountClass.SINGLE,
        target_object_tag=qa.target_object_tag,
        provenance=Provenance.EXPANDED,
        parent_qa_id=qa.qa_id,
    )
    return new_montage, new_qa


def attach_additional_qa(
    montage: Montage,
    extra_targets: Sequence[tuple[SceneTable, ObjectTable]],
    annotator: CompletionClient,
    seed: int,
    scene_index: Mapping[str, SceneTable],
    retry: RetryPolicy = RetryPolicy(),
) -> list[NeedleGroundingQA]:
    """Generate QA for additional targets already inside a LONG montage.

    Each extra target's tag must be absent from every other segment's
    scene; scene_index must resolve all montage segments.
    """
    if classify_duration(montage.total_duration) != DurationClass.LONG:
        raise IneligibleError("long-only", f"montage {montage.montage_id} is not LONG")
    segment_scene_ids = {seg.scene_id for seg in montage.segments}
    out: list[NeedleGroundingQA] = []
    for scene, obj in extra_targets:
        if scene.scene_id not in segment_scene_ids:
            raise NotFoundError(f"scene {scene.scene_id} is not a segment of montage {montage.montage_id}")
        for other_id in segment_scene_ids:
            if other_id == scene.scene_id:
                continue
            other = scene_index.get(other_id)
            if other is None:
                raise NotFoundError(f"scene_index does not resolve segment scene {other_id}")
            if other.has_tag(obj.tag):
                raise ContaminationError(
                    f"extra target tag {obj.tag!r} also appears in segment scene {other_id}"
                )
        out.extend(generate_qa(annotator, (scene, obj), montage, seed, retry=retry))
    return out


def register_needles(montage: Montage, qas: Sequence[NeedleGroundingQA]) -> Montage:
    """Attach each QA's ground truth to the montage's needle map."""
    for qa in qas:
        montage = montage.with_needle_intervals(qa.qa_id, qa.ground_truth)
    return montage


def _snap_to_grid(value: float) -> float:
    return round(value / _CUT_GRID) * _CUT_GRID


def _sample_cut_positions(length: float, k: int, rng) -> list[float]:
    """k-1 ascending cut positions in (0, length) with every gap > 2s.

    Positions land on a fine dyadic grid so the piece lengths telescope
    exactly. Rejection-sampled; falls back to evenly spaced cuts when the
    eligible region is too thin to hit by luck.
    """
    max_index = math.ceil(length / _CUT_GRID) - 1
    if max_index < k - 1:
        raise IneligibleError("partition", f"scene of {length}s cannot host {k} pieces")
    for _ in range(_MAX_CUT_TRIES):
        indices = sorted(rng.sample(range(1, max_index + 1), k - 1))
        cuts = [i * _CUT_GRID for i in indices]
        if _gaps_valid(cuts, length):
            return cuts
    cuts = [_snap_to_grid(j * length / k) for j in range(1, k)]
    if _gaps_valid(cuts, length):
        return cuts
    raise IneligibleError("partition", f"no valid {k}-piece partition of a {length}s scene was found")


def _gaps_valid(cuts: Sequence[float], length: float) -> bool:
    prev = 0.0
    for cut in cuts:
        if cut - prev <= MIN_PIECE_LENGTH:
            return False
        prev = cut
    return length - prev > MIN_PIECE_LENGTH


def split_to_multi_needle(
    qa: NeedleGroundingQA,
    montage: Montage,
    target_object: ObjectTable,
    k: int,
    seed: int,
) -> tuple[Montage, NeedleGroundingQA]:
    """Split a single-needle QA's target scene into k scattered pieces.

    Eligibility: the target scene and the object's visibility must both
    exceed 6s, and the scene must exceed 2k seconds so every piece can
    exceed 2s. Pieces keep their temporal order and are inserted at k
    distinct gap positions among the remaining segments.
    """
    if k < 2:
        raise IneligibleError("k", f"k must be >= 2, got {k}")
    target_index = _locate_target_segment(qa, montage)
    target_seg = montage.segments[target_index]
    length = target_seg.length
    if length <= MIN_SPLIT_SCENE_LENGTH:
        raise IneligibleError(
            "scene-length", f"target scene is {length}s, needs more than {MIN_SPLIT_SCENE_LENGTH}s"
        )
    if target_object.visibility_length <= MIN_SPLIT_VISIBILITY:
        raise IneligibleError(
            "object-visibility",
            f"object visibility is {target_object.visibility_length}s, "
            f"needs more than {MIN_SPLIT_VISIBILITY}s",
        )
    if length <= MIN_PIECE_LENGTH * k:
        raise IneligibleError(
            "partition",
            f"scene of {length}s cannot yield {k} pieces over {MIN_PIECE_LENGTH}s each",
        )

    remaining = [seg for i, seg in enumerate(montage.segments) if i != target_index]
    gap_count = len(remaining) + 1
    if gap_count < k:
        raise IneligibleError("insertion-slots", f"{gap_count} gaps cannot host {k} pieces")

    rng = derive_rng(seed, "split", qa.qa_id, k)
    cuts = _sample_cut_positions(length, k, rng)
    bounds = [0.0, *cuts, length]
    src_start = target_seg.source_interval.start
    pieces = [
        ClipSegment(
            source_video_id=target_seg.source_video_id,
            scene_id=target_seg.scene_id,
            source_interval=TimeInterval(src_start + bounds[j], src_start + bounds[j + 1]),
        )
        for j in range(k)
    ]

    positions = sorted(rng.sample(range(gap_count), k))
    new_segments: list[ClipSegment] = []
    piece_iter = iter(pieces)
    for gap in range(gap_count):
        if gap in positions:
            new_segments.append(next(piece_iter))
        if gap < len(remaining):
            new_segments.append(remaining[gap])

    new_qa_id = "qa-" + stable_digest(qa.qa_id, "multi", k, seed) + "-mlt"
    new_montage_id = "mtg-" + stable_digest(montage.montage_id, "multi", k, seed)
    new_montage = Montage.build(new_montage_id, new_segments)
    needles = tuple(needle_interval_in_montage(new_montage, target_seg.scene_id))
    if len(needles) != k:
        raise NemoforgeError(
            f"expected {k} needle pieces in montage {new_montage_id}, found {len(needles)}"
        )
    new_montage = new_montage.with_needle_intervals(new_qa_id, needles)
    new_qa = NeedleGroundingQA(
        qa_id=new_qa_id,
        montage_id=new_montage_id,
        needle_type=qa.needle_type,
        question=qa.question,
        ground_truth=needles,
        duration_class=classify_duration(new_montage.total_duration),
        needle_count_class=NeedleCountClass.MULTI,
        target_object_tag=qa.target_object_tag,
        provenance=Provenance.EXPANDED,
        parent_qa_id=qa.qa_id,
    )
    return new_montage, new_qa


def feasible_split_counts(scene_length: float, visibility_length: float, max_k: int = 4) -> list[int]:
    """Split sizes a target supports under the eligibility rules."""
    if scene_length <= MIN_SPLIT_SCENE_LENGTH or visibility_length <= MIN_SPLIT_VISIBILITY:
        return []
    return [k for k in range(2, max_k + 1) if scene_length > MIN_PIECE_LENGTH * k]


def choose_split_count(scene_length: float, visibility_length: float, seed: int, qa_id: str) -> int | None:
    """Seeded uniform choice among the feasible split sizes; None when none."""
    options = feasible_split_counts(scene_length, visibility_length)
    if not options:
        return None
    rng = derive_rng(seed, "split-count", qa_id)
    return rng.choice(options)
