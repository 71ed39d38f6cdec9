"""Dataset statistics: the per-duration-class summary table."""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import DurationClass, Montage, NeedleCountClass, NeedleGroundingQA, NeedleType
from .errors import NotFoundError


def compute_stats(
    dataset: Sequence[NeedleGroundingQA],
    montages: Mapping[str, Montage],
) -> dict:
    """Summarize a dataset the way the benchmark table reports it.

    Per duration class: QA pair counts split by needle type and needle
    count, montage duration max/avg/min, the mean needle count per
    question, and the mean needle duration across all needles.
    """
    by_class: dict[str, dict] = {}
    for dc in (DurationClass.SHORT, DurationClass.MEDIUM, DurationClass.LONG):
        qas = [qa for qa in dataset if qa.duration_class == dc]
        if not qas:
            continue
        montage_ids = sorted({qa.montage_id for qa in qas})
        durations = []
        for mid in montage_ids:
            montage = montages.get(mid)
            if montage is None:
                raise NotFoundError(f"dataset references unknown montage {mid}")
            durations.append(montage.total_duration)
        needle_lengths = [iv.length for qa in qas for iv in qa.ground_truth]
        needle_counts = [len(qa.ground_truth) for qa in qas]

        def _count(count_class: NeedleCountClass, needle_type: NeedleType) -> int:
            return sum(
                1
                for qa in qas
                if qa.needle_count_class == count_class and qa.needle_type == needle_type
            )

        by_class[dc.value] = {
            "qa_pairs": {
                "single": {
                    "object": _count(NeedleCountClass.SINGLE, NeedleType.OBJECT),
                    "scene": _count(NeedleCountClass.SINGLE, NeedleType.SCENE),
                },
                "multi": {
                    "object": _count(NeedleCountClass.MULTI, NeedleType.OBJECT),
                    "scene": _count(NeedleCountClass.MULTI, NeedleType.SCENE),
                },
                "all": len(qas),
            },
            "montage_count": len(montage_ids),
            "montage_duration": {
                "max": max(durations),
                "avg": sum(durations) / len(durations),
                "min": min(durations),
            },
            "avg_needles_per_question": sum(needle_counts) / len(needle_counts),
            "avg_needle_duration": sum(needle_lengths) / len(needle_lengths),
        }

    totals = {
        "object": sum(1 for qa in dataset if qa.needle_type == NeedleType.OBJECT),
        "scene": sum(1 for qa in dataset if qa.needle_type == NeedleType.SCENE),
        "all": len(dataset),
    }
    return {"by_duration_class": by_class, "totals": totals}


def render_stats_text(stats: dict) -> str:
    """Aligned text rendering of compute_stats output."""
    lines = []
    header = (
        f"{'class':<8}{'sgl obj':>9}{'sgl scn':>9}{'mlt obj':>9}{'mlt scn':>9}"
        f"{'all':>7}{'dur max':>10}{'dur avg':>10}{'dur min':>10}"
        f"{'needles/q':>11}{'needle dur':>12}"
    )
    lines.append(header)
    for dc, row in stats["by_duration_class"].items():
        qp = row["qa_pairs"]
        md = row["montage_duration"]
        lines.append(
            f"{dc:<8}"
            f"{qp['single']['object']:>9}{qp['single']['scene']:>9}"
            f"{qp['multi']['object']:>9}{qp['multi']['scene']:>9}"
            f"{qp['all']:>7}"
            f"{md['max']:>10.2f}{md['avg']:>10.2f}{md['min']:>10.2f}"
            f"{row['avg_needles_per_question']:>11.2f}"
            f"{row['avg_needle_duration']:>12.2f}"
        )
    totals = stats["totals"]
    lines.append(f"{'all':<8}{totals['object']:>9}{totals['scene']:>9}{'':>9}{'':>9}{totals['all']:>7}")
    return "\n".join(lines)
