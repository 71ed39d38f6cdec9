"""Discrete-timestamp grounding metrics.

A prediction or ground-truth interval [start, end] covers the integer
timestamps floor(start)..ceil(end). All set arithmetic runs on those
integer sets, and ratios are kept as exact rationals until rendering.

Metrics:
  - tIoU between the union sets of two interval lists.
  - Recall@kx at a tIoU threshold, with predictions truncated to
    k * (number of targets) in emission order and matched one-to-one
    to targets greedily by descending pair tIoU.
  - Average mAP: detection-style AP per sample with emission order as
    pseudo-confidence and all-point interpolation, averaged over the
    thresholds 0.1..0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import DurationClass, NeedleCountClass, NeedleGroundingQA, NeedleType, TimeInterval
from .errors import NemoforgeError, NotFoundError

MAP_THRESHOLDS = (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10), Fraction(5, 10))
RECALL_THRESHOLDS = (Fraction(5, 10), Fraction(7, 10))


def timestamp_set(intervals: Iterable[TimeInterval]) -> frozenset[int]:
    """Integer timestamps covered by a list of intervals.

    Each interval contributes floor(start)..ceil(end) inclusive; the
    result is the union over all intervals.
    """
    covered: set[int] = set()
    for iv in intervals:
        covered.update(range(math.floor(iv.start), math.ceil(iv.end) + 1))
    return frozenset(covered)


def tiou_fraction(gt: Sequence[TimeInterval], pred: Sequence[TimeInterval]) -> Fraction:
    """Exact rational tIoU between ground-truth and predicted interval lists."""
    if not gt:
        raise NemoforgeError("tIoU requires non-empty ground truth")
    if not pred:
        return Fraction(0)
    s_gt = timestamp_set(gt)
    s_pred = timestamp_set(pred)
    inter = len(s_gt & s_pred)
    union = len(s_gt | s_pred)
    return Fraction(inter, union)


def tiou(gt: Sequence[TimeInterval], pred: Sequence[TimeInterval]) -> float:
    """tIoU as a float; see tiou_fraction for the exact rational."""
    return float(tiou_fraction(gt, pred))


@dataclass(frozen=True)
class TargetMatch:
    """Assignment of one ground-truth target to at most one prediction."""

    gt_index: int
    pred_index: int | None
    pair_tiou: Fraction

    @property
    def matched(self) -> bool:
        return self.pred_index is not None


def match_targets(
    gt_targets: Sequence[TimeInterval],
    predictions: Sequence[TimeInterval],
    k: int = 1,
) -> list[TargetMatch]:
    """Greedy one-to-one matching of targets to the top k*|gt| predictions.

    Predictions beyond k*|gt| in emission order are ignored. Candidate
    pairs are taken in order of descending pair tIoU (ties broken by
    target index, then prediction index); zero-overlap pairs never match.
    """
    if not gt_targets:
        raise NemoforgeError("match_targets requires non-empty ground truth")
    if k < 1:
        raise NemoforgeError(f"k must be >= 1, got {k}")
    top = list(predictions[: k * len(gt_targets)])
    pairs = []
    for gi, g in enumerate(gt_targets):
        for pi, p in enumerate(top):
            pair = tiou_fraction([g], [p])
            if pair > 0:
                pairs.append((pair, gi, pi))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    gt_taken: dict[int, tuple[int, Fraction]] = {}
    pred_taken: set[int] = set()
    for pair, gi, pi in pairs:
        if gi in gt_taken or pi in pred_taken:
            continue
        gt_taken[gi] = (pi, pair)
        pred_taken.add(pi)
    out = []
    for gi in range(len(gt_targets)):
        if gi in gt_taken:
            pi, pair = gt_taken[gi]
            out.append(TargetMatch(gt_index=gi, pred_index=pi, pair_tiou=pair))
        else:
            out.append(TargetMatch(gt_index=gi, pred_index=None, pair_tiou=Fraction(0)))
    return out


def _average_precision(
    gt_targets: Sequence[TimeInterval],
    predictions: Sequence[TimeInterval],
    threshold: Fraction,
) -> Fraction:
    """Detection-style AP for one sample at one tIoU threshold.

    Predictions are ranked by emission order. Each prediction greedily
    claims the unclaimed target it overlaps best; it is a true positive
    iff that pair tIoU strictly exceeds the threshold. AP integrates the
    all-point interpolated precision envelope over recall.
    """
    if not predictions:
        return Fraction(0)
    taken = [False] * len(gt_targets)
    hits: list[bool] = []
    for p in predictions:
        best_gi = None
        best = Fraction(0)
        for gi, g in enumerate(gt_targets):
            if taken[gi]:
                continue
            pair = tiou_fraction([g], [p])
            if pair > best:
                best = pair
                best_gi = gi
        if best_gi is not None and best > threshold:
            taken[best_gi] = True
            hits.append(True)
        else:
            hits.append(False)
    n_gt = len(gt_targets)
    recalls: list[Fraction] = []
    precisions: list[Fraction] = []
    tp = 0
    for rank, hit in enumerate(hits, start=1):
        tp += 1 if hit else 0
        recalls.append(Fraction(tp, n_gt))
        precisions.append(Fraction(tp, rank))
    ap = Fraction(0)
    prev_recall = Fraction(0)
    envelope = Fraction(0)
    # walk ranks from worst to best so envelope[i] = max precision at recall >= recalls[i]
    envelopes = [Fraction(0)] * len(precisions)
    for i in range(len(precisions) - 1, -1, -1):
        envelope = max(envelope, precisions[i])
        envelopes[i] = envelope
    for i in range(len(precisions)):
        if recalls[i] > prev_recall:
            ap += (recalls[i] - prev_recall) * envelopes[i]
            prev_recall = recalls[i]
    return ap


@dataclass(frozen=True)
class SampleScore:
    """Per-QA scoring state from which every aggregate metric derives."""

    qa_id: str
    k: int
    n_targets: int
    tiou_aggregate: Fraction
    per_target_matches: tuple[TargetMatch, ...]
    ap: Mapping[Fraction, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.per_target_matches) != self.n_targets:
            raise NemoforgeError(
                f"sample {self.qa_id}: {len(self.per_target_matches)} matches for {self.n_targets} targets"
            )

    def recall_hits(self, thresholds: Sequence[Fraction] = RECALL_THRESHOLDS) -> dict[Fraction, int]:
        """Matched-target counts with pair tIoU strictly above each threshold."""
        return {
            m: sum(1 for match in self.per_target_matches if match.matched and match.pair_tiou > m)
            for m in thresholds
        }


def score_sample(
    qa_id: str,
    gt_targets: Sequence[TimeInterval],
    predictions: Sequence[TimeInterval],
    k: int = 1,
    map_thresholds: Sequence[Fraction] = MAP_THRESHOLDS,
) -> SampleScore:
    """Score one QA's predictions against its ground-truth targets."""
    if not gt_targets:
        raise NemoforgeError(f"sample {qa_id} has no ground-truth targets")
    matches = match_targets(gt_targets, predictions, k=k)
    ap = {m: _average_precision(gt_targets, predictions, m) for m in map_thresholds}
    return SampleScore(
        qa_id=qa_id,
        k=k,
        n_targets=len(gt_targets),
        tiou_aggregate=tiou_fraction(gt_targets, predictions),
        per_target_matches=tuple(matches),
        ap=ap,
    )


def recall_at_kx(scores: Sequence[SampleScore], k: int, threshold: float | Fraction) -> float:
    """Percentage of targets matched with pair tIoU strictly above threshold.

    The scores must have been computed at the same k.
    """
    if not scores:
        raise NemoforgeError("recall_at_kx requires at least one sample")
    m = Fraction(threshold).limit_denominator(10**9) if not isinstance(threshold, Fraction) else threshold
    total = 0
    hits = 0
    for score in scores:
        if score.k != k:
            raise NemoforgeError(f"sample {score.qa_id} was scored at k={score.k}, asked for k={k}")
        for match in score.per_target_matches:
            total += 1
            if match.matched and match.pair_tiou > m:
                hits += 1
    return float(Fraction(hits * 100, total))


def average_map(scores: Sequence[SampleScore], thresholds: Sequence[Fraction] = MAP_THRESHOLDS) -> float:
    """Mean AP over samples, averaged over the tIoU thresholds, as a percentage."""
    if not scores:
        raise NemoforgeError("average_map requires at least one sample")
    per_threshold: list[Fraction] = []
    for m in thresholds:
        acc = Fraction(0)
        for score in scores:
            if m not in score.ap:
                raise NemoforgeError(f"sample {score.qa_id} has no AP at threshold {m}")
            acc += score.ap[m]
        per_threshold.append(acc / len(scores))
    return float(sum(per_threshold) / len(per_threshold) * 100)


@dataclass(frozen=True)
class GroupMetrics:
    """Headline numbers for one report cell."""

    n_questions: int
    n_targets: int
    recall_1x_07: float
    recall_1x_05: float
    average_map: float


@dataclass(frozen=True)
class MetricReport:
    """Scores grouped by needle type, duration class, and needle count."""

    groups: Mapping[tuple[str, str, str], GroupMetrics]
    duration_rows: Mapping[str, dict]
    metadata: Mapping[str, str]

    def to_json_dict(self) -> dict:
        return {
            "groups": [
                {
                    "needle_type": nt,
                    "duration_class": dc,
                    "needle_count_class": nc,
                    "n_questions": g.n_questions,
                    "n_targets": g.n_targets,
                    "recall_1x_tiou_0_7": g.recall_1x_07,
                    "recall_1x_tiou_0_5": g.recall_1x_05,
                    "average_map": g.average_map,
                }
                for (nt, dc, nc), g in sorted(self.groups.items())
            ],
            "duration_rows": self.duration_rows,
            "metadata": dict(self.metadata),
        }


def _cell(scores: Sequence[SampleScore]) -> GroupMetrics:
    return GroupMetrics(
        n_questions=len(scores),
        n_targets=sum(s.n_targets for s in scores),
        recall_1x_07=recall_at_kx(scores, 1, Fraction(7, 10)),
        recall_1x_05=recall_at_kx(scores, 1, Fraction(5, 10)),
        average_map=average_map(scores),
    )


def aggregate_report(
    scores: Sequence[SampleScore],
    dataset: Sequence[NeedleGroundingQA],
) -> MetricReport:
    """Group sample scores by the dataset's QA attributes.

    Groups with no samples are omitted. Each duration class also gets a
    per-needle-type row (both needle counts pooled) plus an Avg column:
    the mean of the object and scene Recall@1x tIoU=0.7 values.
    """
    qa_by_id = {qa.qa_id: qa for qa in dataset}
    fine: dict[tuple[str, str, str], list[SampleScore]] = {}
    by_duration_type: dict[tuple[str, str], list[SampleScore]] = {}
    for score in scores:
        qa = qa_by_id.get(score.qa_id)
        if qa is None:
            raise NotFoundError(f"score references unknown qa_id {score.qa_id}")
        key = (qa.needle_type.value, qa.duration_class.value, qa.needle_count_class.value)
        fine.setdefault(key, []).append(score)
        by_duration_type.setdefault((qa.duration_class.value, qa.needle_type.value), []).append(score)

    groups = {key: _cell(cell_scores) for key, cell_scores in fine.items()}

    duration_rows: dict[str, dict] = {}
    for dc in (DurationClass.SHORT, DurationClass.MEDIUM, DurationClass.LONG):
        row: dict = {}
        recalls = []
        for nt in (NeedleType.OBJECT, NeedleType.SCENE):
            cell_scores = by_duration_type.get((dc.value, nt.value))
            if not cell_scores:
                continue
            cell = _cell(cell_scores)
            row[nt.value.lower()] = {
                "n_questions": cell.n_questions,
                "n_targets": cell.n_targets,
                "recall_1x_tiou_0_7": cell.recall_1x_07,
                "recall_1x_tiou_0_5": cell.recall_1x_05,
                "average_map": cell.average_map,
            }
            recalls.append(cell.recall_1x_07)
        if not row:
            continue
        row["avg_recall_1x_tiou_0_7"] = sum(recalls) / len(recalls)
        duration_rows[dc.value] = row

    metadata = {
        "ap_interpolation": "all-point",
        "threshold_rule": "strictly greater",
        "confidence": "emission order",
        "map_thresholds": "0.1,0.2,0.3,0.4,0.5",
    }
    return MetricReport(groups=groups, duration_rows=duration_rows, metadata=metadata)


def render_report_text(report: "MetricReport | Mapping") -> str:
    """Aligned text table with one block per duration class.

    Column order per needle type: Recall@1x tIoU=0.7, Recall@1x tIoU=0.5,
    Average mAP; the trailing Avg column is the object/scene mean of
    Recall@1x tIoU=0.7. Accepts a MetricReport or its JSON dict form.
    """
    if not isinstance(report, MetricReport):
        report = MetricReport(groups={}, duration_rows=dict(report["duration_rows"]), metadata={})
    lines = []
    header = (
        f"{'':<10}"
        f"{'R@1x,0.7':>10}{'R@1x,0.5':>10}{'Avg mAP':>10}"
    )
    for dc in (DurationClass.SHORT, DurationClass.MEDIUM, DurationClass.LONG):
        row = report.duration_rows.get(dc.value)
        if row is None:
            continue
        lines.append(f"== {dc.value} ==")
        lines.append(header)
        for nt_key in ("object", "scene"):
            cell = row.get(nt_key)
            if cell is None:
                continue
            lines.append(
                f"{nt_key:<10}"
                f"{cell['recall_1x_tiou_0_7']:>10.2f}"
                f"{cell['recall_1x_tiou_0_5']:>10.2f}"
                f"{cell['average_map']:>10.2f}"
            )
        lines.append(f"{'Avg':<10}{row['avg_recall_1x_tiou_0_7']:>10.2f}")
        lines.append("")
    return "\n".join(lines)
