"""Metric tests against independent brute-force oracles.

The oracles below recompute everything from the written rules using
plain set enumeration and a max-selection loop, sharing no code with
the module under test.
"""

from __future__ import annotations

import math
import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nemoforge.core import NeedleCountClass, TimeInterval
from nemoforge.errors import NemoforgeError, NotFoundError
from nemoforge.metrics import (
    MAP_THRESHOLDS,
    aggregate_report,
    average_map,
    match_targets,
    recall_at_kx,
    render_report_text,
    score_sample,
    timestamp_set,
    tiou,
    tiou_fraction,
)

from conftest import make_dataset


# ---------------------------------------------------------------- oracles


def oracle_set(intervals) -> set[int]:
    out: set[int] = set()
    for iv in intervals:
        out.update(range(math.floor(iv.start), math.ceil(iv.end) + 1))
    return out


def oracle_tiou(gt, preds) -> Fraction:
    s_gt, s_pred = oracle_set(gt), oracle_set(preds)
    if not s_pred:
        return Fraction(0)
    return Fraction(len(s_gt & s_pred), len(s_gt | s_pred))


def oracle_match(gt, preds, k):
    """Greedy max-selection: repeatedly take the best remaining pair."""
    preds = list(preds)[: k * len(gt)]
    pairs = {}
    for gi, g in enumerate(gt):
        for pi, p in enumerate(preds):
            t = oracle_tiou([g], [p])
            if t > 0:
                pairs[(gi, pi)] = t
    assigned: dict[int, tuple[int, Fraction]] = {}
    used_preds: set[int] = set()
    while pairs:
        # max tiou, ties broken by smallest gt then pred index
        (gi, pi), t = min(pairs.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
        assigned[gi] = (pi, t)
        used_preds.add(pi)
        pairs = {
            (g2, p2): t2 for (g2, p2), t2 in pairs.items() if g2 != gi and p2 not in used_preds
        }
    return [
        (gi, assigned[gi][0], assigned[gi][1]) if gi in assigned else (gi, None, Fraction(0))
        for gi in range(len(gt))
    ]


def random_instance(rng: random.Random):
    """<=5 gt, <=8 preds, one-decimal endpoints in [0, 100]."""

    def interval():
        a = rng.randrange(0, 1000) / 10
        b = a + rng.randrange(0, 200) / 10
        return TimeInterval(a, min(b, 100.0))

    gt = [interval() for _ in range(rng.randint(1, 5))]
    gt.sort(key=lambda iv: (iv.start, iv.end))
    # keep gt disjoint by dropping overlaps (montage needles never overlap)
    kept = []
    for iv in gt:
        if not kept or iv.start >= kept[-1].end:
            kept.append(iv)
    preds = [interval() for _ in range(rng.randint(0, 8))]
    return kept, preds


# ----------------------------------------------------------- pinned values


def test_timestamp_set_pinned():
    assert timestamp_set([TimeInterval(2.0, 5.0)]) == {2, 3, 4, 5}
    assert timestamp_set([TimeInterval(2.5, 5.2)]) == {2, 3, 4, 5, 6}
    assert timestamp_set([TimeInterval(0.0, 0.0)]) == {0}


def test_timestamp_set_union_of_ranges():
    got = timestamp_set([TimeInterval(1.0, 2.0), TimeInterval(4.5, 5.0)])
    assert got == {1, 2, 4, 5}


def test_tiou_identity():
    gt = [TimeInterval(10.0, 13.0)]
    assert tiou(gt, gt) == 1.0


def test_tiou_pinned_discrete_values():
    # the discrete rule gives 0.6 where continuous IoU would give 0.5
    assert tiou([TimeInterval(2, 5)], [TimeInterval(3, 6)]) == 0.6
    assert tiou_fraction([TimeInterval(2, 5)], [TimeInterval(3, 6)]) == Fraction(3, 5)
    got = tiou([TimeInterval(1, 2), TimeInterval(4, 5)], [TimeInterval(1, 5)])
    assert got == 0.8


def test_tiou_empty_pred_is_zero_and_empty_gt_errors():
    assert tiou([TimeInterval(1, 2)], []) == 0.0
    with pytest.raises(NemoforgeError):
        tiou([], [TimeInterval(1, 2)])


def test_tiou_oracle_equivalence_1000_cases():
    rng = random.Random(1234)
    for _ in range(1000):
        gt, preds = random_instance(rng)
        assert tiou_fraction(gt, preds) == oracle_tiou(gt, preds)


def test_match_single_exact():
    [m] = match_targets([TimeInterval(3.0, 8.0)], [TimeInterval(3.0, 8.0)], k=1)
    assert m.pred_index == 0 and m.pair_tiou == 1


def test_match_pinned_two_targets():
    gt = [TimeInterval(10, 19), TimeInterval(50, 59)]
    preds = [TimeInterval(10, 17), TimeInterval(50, 52)]
    # pair tious: pred0/gt0 = 8/10, pred1/gt1 = 3/10
    matches = match_targets(gt, preds, k=1)
    assert [(m.gt_index, m.pred_index) for m in matches] == [(0, 0), (1, 1)]
    assert [m.pair_tiou for m in matches] == [Fraction(8, 10), Fraction(3, 10)]


def test_match_truncates_to_top_kx():
    gt = [TimeInterval(10, 20)]
    preds = [TimeInterval(90, 95), TimeInterval(10, 20), TimeInterval(10, 20)]
    [m] = match_targets(gt, preds, k=1)
    # only the first (top-1x) prediction is considered, and it misses
    assert m.pred_index is None
    [m] = match_targets(gt, preds, k=2)
    assert m.pred_index == 1


def test_match_zero_overlap_never_assigned():
    [m] = match_targets([TimeInterval(10, 12)], [TimeInterval(50, 60)], k=1)
    assert m.pred_index is None and m.pair_tiou == 0


def test_match_oracle_equivalence_1000_cases():
    rng = random.Random(987)
    for _ in range(1000):
        gt, preds = random_instance(rng)
        if not gt:
            continue
        k = rng.randint(1, 3)
        got = [(m.gt_index, m.pred_index, m.pair_tiou) for m in match_targets(gt, preds, k=k)]
        assert got == oracle_match(gt, preds, k)


def test_recall_pinned_half():
    gt = [TimeInterval(10, 19), TimeInterval(50, 59)]
    preds = [TimeInterval(10, 17), TimeInterval(50, 52)]
    score = score_sample("qa-r", gt, preds, k=1)
    assert recall_at_kx([score], 1, 0.7) == 50.0
    assert score.recall_hits()[Fraction(7, 10)] == 1


def test_recall_perfect_and_empty():
    gt = [TimeInterval(5, 9)]
    full = score_sample("qa-a", gt, gt, k=1)
    none = score_sample("qa-b", gt, [], k=1)
    assert recall_at_kx([full], 1, 0.7) == 100.0
    assert recall_at_kx([none], 1, 0.5) == 0.0
    assert recall_at_kx([full, none], 1, 0.5) == 50.0


def test_recall_requires_matching_k():
    score = score_sample("qa-a", [TimeInterval(5, 9)], [], k=2)
    with pytest.raises(NemoforgeError):
        recall_at_kx([score], 1, 0.5)
    with pytest.raises(NemoforgeError):
        recall_at_kx([], 1, 0.5)


def test_map_pinned_rank2_hit():
    # 1 gt; first pred misses entirely, second hits at tIoU 0.6 > all five
    # thresholds, so AP = 0.5 at each and the average is 50.0
    gt = [TimeInterval(2.0, 5.0)]
    preds = [TimeInterval(50.0, 60.0), TimeInterval(3.0, 6.0)]
    score = score_sample("qa-m", gt, preds, k=1)
    assert tiou_fraction(gt, [preds[1]]) == Fraction(6, 10)
    assert all(score.ap[m] == Fraction(1, 2) for m in MAP_THRESHOLDS)
    assert average_map([score]) == 50.0


def test_map_perfect_and_zero():
    gt = [TimeInterval(3.0, 9.0)]
    assert average_map([score_sample("qa-a", gt, gt, k=1)]) == 100.0
    assert average_map([score_sample("qa-b", gt, [], k=1)]) == 0.0


def test_map_mean_over_samples_then_thresholds():
    gt = [TimeInterval(3.0, 9.0)]
    scores = [score_sample("qa-a", gt, gt, k=1), score_sample("qa-b", gt, [], k=1)]
    assert average_map(scores) == 50.0


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_recall_monotone_in_threshold_and_k(seed):
    rng = random.Random(seed)
    gt, preds = random_instance(rng)
    if not gt:
        return
    scores_k1 = [score_sample("qa", gt, preds, k=1)]
    recalls = [recall_at_kx(scores_k1, 1, Fraction(t, 10)) for t in range(1, 10)]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))
    scores_k2 = [score_sample("qa", gt, preds, k=2)]
    assert recall_at_kx(scores_k2, 2, 0.5) >= recall_at_kx(scores_k1, 1, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_tiou_symmetry_and_bounds(seed):
    rng = random.Random(seed)
    gt, preds = random_instance(rng)
    if not gt or not preds:
        return
    a = tiou_fraction(gt, preds)
    b = tiou_fraction(preds, gt)
    assert a == b
    assert 0 <= a <= 1
    assert (a == 0) == (oracle_set(gt).isdisjoint(oracle_set(preds)))


# ------------------------------------------------------------- aggregation


def test_aggregate_report_avg_column():
    qas, _ = make_dataset(3)
    scores = []
    for qa in qas:
        # object QA answered well, scene QA answered badly, giving known
        # per-type recalls inside each duration class
        if qa.needle_type.value == "OBJECT":
            preds = list(qa.ground_truth)
        else:
            preds = [TimeInterval(0.0, 1.0)]
        scores.append(score_sample(qa.qa_id, qa.ground_truth, preds, k=1))
    report = aggregate_report(scores, qas)
    for row in report.duration_rows.values():
        assert row["object"]["recall_1x_tiou_0_7"] == 100.0
        assert row["avg_recall_1x_tiou_0_7"] == 50.0


def test_aggregate_report_pinned_mean():
    # object recall 60 and scene recall 70 average to 65
    qas, _ = make_dataset(3)
    short_qas = [qa for qa in qas if qa.duration_class.value == "SHORT"]
    obj = [qa for qa in short_qas if qa.needle_type.value == "OBJECT"][0]
    scn = [qa for qa in short_qas if qa.needle_type.value == "SCENE"][0]
    miss = TimeInterval(9990.0, 9999.0)

    def targets(n):
        return [TimeInterval(float(i * 20), float(i * 20 + 9)) for i in range(n)]

    def preds_hitting(gt, hits):
        return [gt[i] if i < hits else miss for i in range(len(gt))]

    gt5, gt10 = targets(5), targets(10)
    scores = [
        score_sample(obj.qa_id, gt5, preds_hitting(gt5, 3), k=1),  # 3/5 = 60%
        score_sample(scn.qa_id, gt10, preds_hitting(gt10, 7), k=1),  # 7/10 = 70%
    ]
    fake_dataset = [
        replace(obj, ground_truth=tuple(gt5), needle_count_class=NeedleCountClass.MULTI),
        replace(scn, ground_truth=tuple(gt10), needle_count_class=NeedleCountClass.MULTI),
    ]
    report = aggregate_report(scores, fake_dataset)
    row = report.duration_rows["SHORT"]
    assert row["object"]["recall_1x_tiou_0_7"] == 60.0
    assert row["scene"]["recall_1x_tiou_0_7"] == 70.0
    assert row["avg_recall_1x_tiou_0_7"] == 65.0


def test_aggregate_report_unknown_qa_errors_and_groups_omitted():
    qas, _ = make_dataset(1)
    score = score_sample("qa-zzz", [TimeInterval(1, 2)], [], k=1)
    with pytest.raises(NotFoundError):
        aggregate_report([score], qas)
    scores = [score_sample(qa.qa_id, qa.ground_truth, list(qa.ground_truth), k=1) for qa in qas]
    report = aggregate_report(scores, qas)
    assert set(report.duration_rows) == {"SHORT"}
    assert all(key[1] == "SHORT" for key in report.groups)


def test_render_report_text_columns():
    qas, _ = make_dataset(3)
    scores = [score_sample(qa.qa_id, qa.ground_truth, list(qa.ground_truth), k=1) for qa in qas]
    report = aggregate_report(scores, qas)
    text = render_report_text(report)
    assert "R@1x,0.7" in text and "R@1x,0.5" in text and "Avg mAP" in text
    assert text.index("R@1x,0.7") < text.index("R@1x,0.5") < text.index("Avg mAP")
    # dict form renders the same table
    assert render_report_text(report.to_json_dict()) == text
