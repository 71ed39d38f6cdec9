"""Shared builders for tests.

Every fixture time is a multiple of 0.25 (dyadic), so segment sums,
prefix offsets, and interval lengths are exact in floating point and
tests can assert equality without tolerances.
"""

from __future__ import annotations

import itertools

import pytest

from nemoforge.core import (
    ClipSegment,
    DurationClass,
    Montage,
    NeedleGroundingQA,
    NeedleType,
    Provenance,
    TimeInterval,
    classify_duration,
    needle_count_class_for,
)
from nemoforge.representation import ObjectTable, SceneTable, TrackPoint, VideoRepresentation


def make_object(
    object_id: str,
    scene_id: str,
    *,
    tag: str,
    vis: tuple[float, float] = (0.0, 4.0),
    area: float = 0.1,
    expression: str | None = None,
) -> ObjectTable:
    vis_iv = TimeInterval(*vis)
    # box (x, y, 2*area, 0.5): w*h == area exactly for any float area <= 0.5
    box = (0.0, 0.0, 2 * area, 0.5)
    mid = (vis_iv.start + vis_iv.end) / 2
    times = (vis_iv.start, mid, vis_iv.end) if vis_iv.length > 0 else (vis_iv.start,)
    return ObjectTable(
        object_id=object_id,
        scene_id=scene_id,
        visibility_interval=vis_iv,
        tag=tag,
        referring_expression=expression or f"the {tag} in frame",
        track=tuple(TrackPoint(t, box) for t in times),
    )


def make_scene(
    scene_id: str,
    video_id: str,
    *,
    start: float = 0.0,
    length: float = 10.0,
    objects: tuple[ObjectTable, ...] = (),
    extra_tags: tuple[str, ...] = (),
    subtitles: str | None = None,
) -> SceneTable:
    return SceneTable(
        scene_id=scene_id,
        source_video_id=video_id,
        source_interval=TimeInterval(start, start + length),
        subtitles=subtitles if subtitles is not None else f"someone talks over {scene_id}",
        object_tags=frozenset(o.tag for o in objects) | frozenset(extra_tags),
        object_table_ids=tuple(o.object_id for o in objects),
    )


# Dyadic scene lengths; averages ~15.7s so 60 scenes give ~945s per video.
SCENE_LENGTH_CYCLE = (12.0, 16.0, 14.5, 20.0, 13.25, 18.75, 15.5)


def make_video(
    video_id: str,
    program_id: str,
    n_scenes: int = 60,
    *,
    prominent_every: int = 6,
    prominent_area: float = 0.125,
) -> VideoRepresentation:
    """A video of back-to-back scenes, each with one uniquely tagged object.

    Every prominent_every-th scene carries a prominent object (visible 9s,
    mid-size box) so it qualifies as a needle target; the rest have tiny
    short-lived objects that never qualify.
    """
    scenes = []
    objects = []
    cursor = 0.0
    lengths = itertools.cycle(SCENE_LENGTH_CYCLE)
    for i in range(n_scenes):
        length = next(lengths)
        scene_id = f"{video_id}-s{i:03d}"
        object_id = f"{scene_id}-obj"
        tag = f"prop {video_id} {i:03d}"
        if i % prominent_every == 0:
            obj = make_object(object_id, scene_id, tag=tag, vis=(0.5, 9.5), area=prominent_area)
        else:
            obj = make_object(object_id, scene_id, tag=tag, vis=(0.0, 2.0), area=0.01)
        scenes.append(make_scene(scene_id, video_id, start=cursor, length=length, objects=(obj,)))
        objects.append(obj)
        cursor += length
    return VideoRepresentation(
        source_video_id=video_id,
        program_id=program_id,
        scenes=tuple(scenes),
        objects=tuple(objects),
        duration=cursor,
    )


@pytest.fixture(scope="session")
def corpus() -> list[VideoRepresentation]:
    """Six same-program videos (enough pool for LONG montages) plus one outsider."""
    reps = [make_video(f"vid-a{i}", "prog-a") for i in range(1, 7)]
    reps.append(make_video("vid-b1", "prog-b", n_scenes=12))
    return reps


def make_montage(
    montage_id: str,
    segment_lengths: tuple[float, ...],
    *,
    video_id: str = "vid-x",
    needles: dict[str, tuple[tuple[float, float], ...]] | None = None,
) -> Montage:
    segments = tuple(
        ClipSegment(
            source_video_id=video_id,
            scene_id=f"{montage_id}-seg{i:02d}",
            source_interval=TimeInterval(100.0 * i, 100.0 * i + length),
        )
        for i, length in enumerate(segment_lengths)
    )
    needle_map = {
        qa_id: tuple(TimeInterval(*iv) for iv in ivs) for qa_id, ivs in (needles or {}).items()
    }
    return Montage.build(montage_id, segments, needle_map)


def make_qa(
    qa_id: str,
    montage: Montage,
    intervals: tuple[tuple[float, float], ...],
    *,
    needle_type: NeedleType = NeedleType.OBJECT,
    question: str | None = None,
    tag: str | None = None,
    provenance: Provenance = Provenance.GENERATED,
    parent: str | None = None,
) -> NeedleGroundingQA:
    gt = tuple(TimeInterval(*iv) for iv in intervals)
    return NeedleGroundingQA(
        qa_id=qa_id,
        montage_id=montage.montage_id,
        needle_type=needle_type,
        question=question or f"When does the target of {qa_id} show in the video?",
        ground_truth=gt,
        duration_class=classify_duration(montage.total_duration),
        needle_count_class=needle_count_class_for(gt),
        target_object_tag=tag,
        provenance=provenance,
        parent_qa_id=parent,
    )


def make_dataset(n_montages: int = 5) -> tuple[list[NeedleGroundingQA], dict[str, Montage]]:
    """A mixed-class dataset: one object and one scene QA per montage.

    Montage i alternates SHORT / MEDIUM / LONG by scaling segment lengths.
    """
    qas = []
    montages = {}
    for i in range(n_montages):
        duration_class = (DurationClass.SHORT, DurationClass.MEDIUM, DurationClass.LONG)[i % 3]
        unit = {DurationClass.SHORT: 10.0, DurationClass.MEDIUM: 50.0, DurationClass.LONG: 300.0}[duration_class]
        lengths = (unit, 8.0, unit, unit + 2.0)
        mid = f"mtg-{i:03d}"
        needle = (lengths[0], lengths[0] + 8.0)
        montage = make_montage(
            mid,
            lengths,
            needles={f"qa-{i:03d}-obj": (needle,), f"qa-{i:03d}-scn": (needle,)},
        )
        montages[mid] = montage
        qas.append(make_qa(f"qa-{i:03d}-obj", montage, (needle,), needle_type=NeedleType.OBJECT, tag=f"prop {i}"))
        qas.append(
            make_qa(
                f"qa-{i:03d}-scn",
                montage,
                (needle,),
                needle_type=NeedleType.SCENE,
                question=f"When does scene {i} with the prop happen?",
            )
        )
    return qas, montages


@pytest.fixture
def dataset():
    return make_dataset()


def single_qa_montage() -> tuple[NeedleGroundingQA, Montage]:
    montage = make_montage("mtg-one", (20.0, 6.5, 30.0), needles={"qa-one": ((20.0, 26.5),)})
    qa = make_qa("qa-one", montage, ((20.0, 26.5),), tag="blue lamp")
    return qa, montage
