"""Dataset expansion: longer montages, multi-needle splits, attached questions."""

from __future__ import annotations

from dataclasses import replace

import pytest
from conftest import make_montage, make_object, make_qa, make_scene

from nemoforge import (
    ContaminationError,
    DurationClass,
    IneligibleError,
    NeedleCountClass,
    NeedleGroundingQA,
    NeedleType,
    NemoforgeError,
    NotFoundError,
    Provenance,
    StubAnnotator,
    SynthesisConfig,
    attach_additional_qa,
    choose_split_count,
    classify_duration,
    compose_montage,
    eligible_target_scenes,
    extend_montage,
    feasible_split_counts,
    needle_interval_in_montage,
    register_needles,
    scenes_without_tag,
    split_to_multi_needle,
)


def make_parent(corpus, duration_class, seed, video_id="vid-a1"):
    """Compose a montage around vid-a1's first prominent object and wrap it in a QA."""
    rep = next(r for r in corpus if r.source_video_id == video_id)
    scene, obj = eligible_target_scenes(rep)[0]
    negatives = scenes_without_tag(
        corpus,
        obj.tag,
        same_video_only=duration_class != DurationClass.LONG,
        target_video_id=video_id,
    )
    cfg = SynthesisConfig.sample(seed, duration_class)
    montage, needle = compose_montage((scene, obj), negatives, cfg)
    qa = NeedleGroundingQA(
        qa_id=f"qa-parent-{duration_class.value.lower()}-{seed}",
        montage_id=montage.montage_id,
        needle_type=NeedleType.OBJECT,
        question=f"When does the {obj.tag} show in the video?",
        ground_truth=(needle,),
        duration_class=classify_duration(montage.total_duration),
        needle_count_class=NeedleCountClass.SINGLE,
        target_object_tag=obj.tag,
        provenance=Provenance.GENERATED,
    )
    return montage.with_needle_intervals(qa.qa_id, (needle,)), qa, scene, obj


class TestExtendMontage:
    def test_short_to_medium_preserves_needle_and_question(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=101)
        new_montage, new_qa = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=7)
        assert 150.0 <= new_montage.total_duration <= 900.0
        assert classify_duration(new_montage.total_duration) is DurationClass.MEDIUM
        assert new_qa.duration_class is DurationClass.MEDIUM
        # same scene clip, so the needle length carries over exactly
        assert new_qa.ground_truth[0].length == qa.ground_truth[0].length
        assert new_qa.question == qa.question
        assert new_qa.needle_count_class is NeedleCountClass.SINGLE
        assert new_qa.provenance is Provenance.EXPANDED
        assert new_qa.parent_qa_id == qa.qa_id
        assert new_qa.qa_id.endswith("-ext")
        assert new_qa.qa_id != qa.qa_id
        assert new_qa.montage_id == new_montage.montage_id
        assert new_montage.needle_intervals[new_qa.qa_id] == new_qa.ground_truth
        new_qa.check_against(new_montage)

    def test_medium_extension_stays_in_source_video(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=41)
        new_montage, _ = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=3)
        assert {seg.source_video_id for seg in new_montage.segments} == {"vid-a1"}

    def test_long_extension_draws_from_program_pool(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=3)
        new_montage, new_qa = extend_montage(qa, montage, corpus, DurationClass.LONG, seed=13)
        assert new_montage.total_duration > 900.0
        assert new_qa.duration_class is DurationClass.LONG
        vids = {seg.source_video_id for seg in new_montage.segments}
        assert len(vids) > 1
        assert "vid-b1" not in vids  # other program never contributes negatives

    def test_extension_chain_records_lineage(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=31)
        med_montage, med_qa = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=8)
        long_montage, long_qa = extend_montage(med_qa, med_montage, corpus, DurationClass.LONG, seed=8)
        assert med_qa.parent_qa_id == qa.qa_id
        assert long_qa.parent_qa_id == med_qa.qa_id
        assert long_qa.question == qa.question
        assert long_qa.ground_truth[0].length == qa.ground_truth[0].length
        assert long_montage.total_duration > 900.0

    def test_never_leaks_target_tag(self, corpus):
        montage, qa, scene, obj = make_parent(corpus, DurationClass.SHORT, seed=2)
        scene_lookup = {s.scene_id: s for rep in corpus for s in rep.scenes}
        for seed in range(10):
            new_montage, _ = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=seed)
            hits = [seg for seg in new_montage.segments if seg.scene_id == scene.scene_id]
            assert len(hits) == 1
            for seg in new_montage.segments:
                if seg.scene_id != scene.scene_id:
                    assert not scene_lookup[seg.scene_id].has_tag(obj.tag)

    @pytest.mark.parametrize(
        "parent_class,target_class",
        [
            (DurationClass.SHORT, DurationClass.SHORT),
            (DurationClass.MEDIUM, DurationClass.MEDIUM),
            (DurationClass.MEDIUM, DurationClass.SHORT),
        ],
    )
    def test_rejects_non_increasing_class(self, corpus, parent_class, target_class):
        montage, qa, _, _ = make_parent(corpus, parent_class, seed=21)
        with pytest.raises(IneligibleError) as exc:
            extend_montage(qa, montage, corpus, target_class, seed=1)
        assert exc.value.rule == "class-order"

    def test_rejects_multi_needle_parent(self):
        montage = make_montage("mtg-multi", (10.0, 8.0, 10.0, 8.0))
        qa = make_qa("qa-multi", montage, ((10.0, 18.0), (28.0, 36.0)), tag="prop z")
        with pytest.raises(IneligibleError) as exc:
            extend_montage(qa, montage, [], DurationClass.MEDIUM, seed=1)
        assert exc.value.rule == "single-needle"

    def test_requires_target_tag(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=4)
        untagged = replace(qa, target_object_tag=None)
        with pytest.raises(NemoforgeError, match="target_object_tag"):
            extend_montage(untagged, montage, corpus, DurationClass.MEDIUM, seed=1)

    def test_deterministic_per_seed(self, corpus):
        montage, qa, _, _ = make_parent(corpus, DurationClass.SHORT, seed=17)
        first = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=99)
        second = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=99)
        assert first[0].to_json_dict() == second[0].to_json_dict()
        assert first[1].to_json_dict() == second[1].to_json_dict()
        other = extend_montage(qa, montage, corpus, DurationClass.MEDIUM, seed=100)
        assert other[0].to_json_dict() != first[0].to_json_dict()


def make_split_parent(target_len=9.0, vis_len=7.0, n_segments=5, target_index=1):
    lengths = [20.0] * n_segments
    lengths[target_index] = target_len
    montage = make_montage("mtg-split", tuple(lengths))
    start = sum(lengths[:target_index])
    qa = make_qa("qa-split", montage, ((start, start + target_len),), tag="prop split")
    obj = make_object(
        "obj-split",
        f"mtg-split-seg{target_index:02d}",
        tag="prop split",
        vis=(1.0, 1.0 + vis_len),
    )
    return montage, qa, obj


class TestSplitToMultiNeedle:
    def test_three_way_split_pinned(self):
        montage, qa, obj = make_split_parent()
        new_montage, new_qa = split_to_multi_needle(qa, montage, obj, 3, seed=11)
        pieces = [seg for seg in new_montage.segments if seg.scene_id == "mtg-split-seg01"]
        assert len(pieces) == 3
        assert all(seg.length > 2.0 for seg in pieces)
        assert sum(seg.length for seg in pieces) == 9.0  # dyadic cuts telescope exactly
        assert new_montage.total_duration == montage.total_duration
        assert len(new_montage.segments) == 7
        assert len(new_qa.ground_truth) == 3
        assert new_qa.needle_count_class is NeedleCountClass.MULTI
        assert new_qa.provenance is Provenance.EXPANDED
        assert new_qa.parent_qa_id == "qa-split"
        assert new_qa.qa_id.endswith("-mlt")
        assert new_qa.duration_class is classify_duration(new_montage.total_duration)
        assert new_montage.needle_intervals[new_qa.qa_id] == new_qa.ground_truth
        # pieces keep temporal order and tile the original clip
        src = [(seg.source_interval.start, seg.source_interval.end) for seg in pieces]
        assert src == sorted(src)
        assert src[0][0] == 100.0 and src[-1][1] == 109.0
        for (_, left_end), (right_start, _) in zip(src, src[1:]):
            assert left_end == right_start
        new_qa.check_against(new_montage)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_invariants_across_seeds(self, k):
        montage, qa, obj = make_split_parent(target_len=12.5, vis_len=8.0, n_segments=6)
        for seed in range(25):
            new_montage, new_qa = split_to_multi_needle(qa, montage, obj, k, seed=seed)
            pieces = [seg for seg in new_montage.segments if seg.scene_id == "mtg-split-seg01"]
            assert len(pieces) == k
            assert all(seg.length > 2.0 for seg in pieces)
            assert sum(seg.length for seg in pieces) == 12.5
            assert new_montage.total_duration == montage.total_duration
            needles = new_qa.ground_truth
            assert needles == tuple(needle_interval_in_montage(new_montage, "mtg-split-seg01"))
            assert all(a.end <= b.start for a, b in zip(needles, needles[1:]))
            others = [s.scene_id for s in new_montage.segments if s.scene_id != "mtg-split-seg01"]
            assert others == [f"mtg-split-seg{i:02d}" for i in (0, 2, 3, 4, 5)]

    def test_deterministic_and_seed_sensitive(self):
        montage, qa, obj = make_split_parent()
        first = split_to_multi_needle(qa, montage, obj, 3, seed=5)
        second = split_to_multi_needle(qa, montage, obj, 3, seed=5)
        assert first[0].to_json_dict() == second[0].to_json_dict()
        assert first[1].to_json_dict() == second[1].to_json_dict()
        layouts = {
            tuple((iv.start, iv.end) for iv in split_to_multi_needle(qa, montage, obj, 3, seed=s)[1].ground_truth)
            for s in range(10)
        }
        assert len(layouts) > 1

    def test_rejects_k_below_two(self):
        montage, qa, obj = make_split_parent()
        with pytest.raises(IneligibleError) as exc:
            split_to_multi_needle(qa, montage, obj, 1, seed=0)
        assert exc.value.rule == "k"

    @pytest.mark.parametrize("target_len", [5.0, 6.0])
    def test_rejects_short_scene(self, target_len):
        montage, qa, obj = make_split_parent(target_len=target_len)
        with pytest.raises(IneligibleError) as exc:
            split_to_multi_needle(qa, montage, obj, 2, seed=0)
        assert exc.value.rule == "scene-length"

    def test_rejects_low_visibility(self):
        montage, qa, obj = make_split_parent(vis_len=6.0)
        with pytest.raises(IneligibleError) as exc:
            split_to_multi_needle(qa, montage, obj, 2, seed=0)
        assert exc.value.rule == "object-visibility"

    def test_rejects_infeasible_partition(self):
        # an 8s scene cannot yield four pieces all longer than 2s
        montage, qa, obj = make_split_parent(target_len=8.0)
        with pytest.raises(IneligibleError) as exc:
            split_to_multi_needle(qa, montage, obj, 4, seed=0)
        assert exc.value.rule == "partition"

    def test_rejects_when_gaps_run_out(self):
        montage, qa, obj = make_split_parent(n_segments=2)
        with pytest.raises(IneligibleError) as exc:
            split_to_multi_needle(qa, montage, obj, 3, seed=0)
        assert exc.value.rule == "insertion-slots"


def test_feasible_split_counts_pinned():
    assert feasible_split_counts(9.0, 7.0) == [2, 3, 4]
    assert feasible_split_counts(8.0, 7.0) == [2, 3]
    assert feasible_split_counts(6.5, 7.0) == [2, 3]
    assert feasible_split_counts(6.0, 7.0) == []
    assert feasible_split_counts(9.0, 6.0) == []
    assert feasible_split_counts(100.0, 7.0, max_k=6) == [2, 3, 4, 5, 6]


def test_choose_split_count_seeded():
    assert choose_split_count(9.0, 7.0, 42, "qa-1") == choose_split_count(9.0, 7.0, 42, "qa-1")
    picks = {choose_split_count(9.0, 7.0, 42, f"qa-{i}") for i in range(30)}
    assert picks <= {2, 3, 4}
    assert len(picks) > 1
    assert choose_split_count(5.0, 7.0, 42, "qa-1") is None


class TestAttachAdditionalQA:
    def test_two_qa_per_clean_target(self, corpus):
        montage, _, target_scene, _ = make_parent(corpus, DurationClass.LONG, seed=5)
        scene_index = {s.scene_id: s for rep in corpus for s in rep.scenes}
        eligibles = {}
        for rep in corpus:
            for scene, obj in eligible_target_scenes(rep):
                eligibles[scene.scene_id] = (scene, obj)
        extras = [
            eligibles[seg.scene_id]
            for seg in montage.segments
            if seg.scene_id in eligibles and seg.scene_id != target_scene.scene_id
        ][:3]
        assert len(extras) == 3  # a LONG montage sweeps in plenty of prominent scenes
        out = attach_additional_qa(montage, extras, StubAnnotator(), 9, scene_index)
        assert len(out) == 6
        assert len({qa.qa_id for qa in out}) == 6
        for i in range(0, 6, 2):
            first, second = out[i], out[i + 1]
            assert {first.needle_type, second.needle_type} == {NeedleType.SCENE, NeedleType.OBJECT}
            assert first.ground_truth == second.ground_truth
            assert first.montage_id == montage.montage_id
        for (scene, _), qa in zip(extras, out[::2]):
            assert qa.ground_truth == tuple(needle_interval_in_montage(montage, scene.scene_id))

    def test_empty_targets_yield_nothing(self):
        montage = make_montage("mtg-long", (300.0, 310.0, 320.0))
        assert attach_additional_qa(montage, [], StubAnnotator(), 1, {}) == []

    def test_rejects_non_long_montage(self):
        montage = make_montage("mtg-short", (10.0, 8.0))
        scene = make_scene("mtg-short-seg00", "vid-x", length=10.0)
        obj = make_object("obj-a", "mtg-short-seg00", tag="prop a")
        with pytest.raises(IneligibleError) as exc:
            attach_additional_qa(montage, [(scene, obj)], StubAnnotator(), 1, {})
        assert exc.value.rule == "long-only"

    def test_rejects_target_outside_montage(self):
        montage = make_montage("mtg-long", (300.0, 310.0, 320.0))
        scene = make_scene("scn-alien", "vid-x", length=10.0)
        obj = make_object("obj-a", "scn-alien", tag="prop a")
        with pytest.raises(NotFoundError):
            attach_additional_qa(montage, [(scene, obj)], StubAnnotator(), 1, {})

    def test_rejects_contaminated_neighbour(self):
        montage = make_montage("mtg-long", (300.0, 310.0, 320.0))
        obj = make_object("obj-t", "mtg-long-seg01", tag="gold watch", vis=(0.5, 9.5))
        target = make_scene("mtg-long-seg01", "vid-x", start=100.0, length=310.0, objects=(obj,))
        dirty = make_scene("mtg-long-seg00", "vid-x", length=300.0, extra_tags=("gold watch",))
        clean = make_scene("mtg-long-seg02", "vid-x", start=200.0, length=320.0)
        index = {s.scene_id: s for s in (target, dirty, clean)}
        with pytest.raises(ContaminationError):
            attach_additional_qa(montage, [(target, obj)], StubAnnotator(), 1, index)

    def test_rejects_unresolved_scene_index(self):
        montage = make_montage("mtg-long", (300.0, 310.0, 320.0))
        obj = make_object("obj-t", "mtg-long-seg01", tag="gold watch", vis=(0.5, 9.5))
        target = make_scene("mtg-long-seg01", "vid-x", start=100.0, length=310.0, objects=(obj,))
        clean = make_scene("mtg-long-seg00", "vid-x", length=300.0)
        index = {s.scene_id: s for s in (target, clean)}  # seg02 missing
        with pytest.raises(NotFoundError, match="scene_index"):
            attach_additional_qa(montage, [(target, obj)], StubAnnotator(), 1, index)


def test_register_needles_accumulates():
    montage = make_montage("mtg-reg", (10.0, 8.0, 12.0))
    qa_one = make_qa("qa-r1", montage, ((10.0, 18.0),))
    qa_two = make_qa("qa-r2", montage, ((0.0, 10.0), (18.0, 30.0)))
    tagged = register_needles(montage, [qa_one, qa_two])
    assert set(tagged.needle_intervals) == {"qa-r1", "qa-r2"}
    assert tagged.needle_intervals["qa-r1"] == qa_one.ground_truth
    assert tagged.needle_intervals["qa-r2"] == qa_two.ground_truth
    assert montage.needle_intervals == {}
