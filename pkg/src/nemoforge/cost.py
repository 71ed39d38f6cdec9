"""Annotation cost model.

Manual annotation of one item costs 3T + S1 + S2 + S3: three watches of
the source video (annotate, verify, adjudicate) plus per-stage overheads.
The automated pipeline costs T + S3': one watch plus a final human check.
The reduction ratio alpha compares the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NemoforgeError


def _require_positive(name: str, value: float) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise NemoforgeError(f"{name} must be a number, got {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v) or v <= 0:
        raise NemoforgeError(f"{name} must be finite and positive, got {value!r}")
    return v


@dataclass(frozen=True)
class CostParams:
    """Per-item annotation times, all in the same unit (seconds or minutes)."""

    video_time: float       # T, one watch of the source video
    stage1_overhead: float  # S1, manual annotation overhead
    stage2_overhead: float  # S2, manual verification overhead
    stage3_overhead: float  # S3, manual adjudication overhead
    auto_check_overhead: float  # S3', human check of pipeline output

    def __post_init__(self):
        _require_positive("video_time", self.video_time)
        _require_positive("stage1_overhead", self.stage1_overhead)
        _require_positive("stage2_overhead", self.stage2_overhead)
        _require_positive("stage3_overhead", self.stage3_overhead)
        _require_positive("auto_check_overhead", self.auto_check_overhead)


def manual_cost(params: CostParams) -> float:
    """Fully manual pipeline time: 3T + S1 + S2 + S3."""
    return 3 * params.video_time + params.stage1_overhead + params.stage2_overhead + params.stage3_overhead


def auto_cost(params: CostParams) -> float:
    """Automated pipeline time: T + S3'."""
    return params.video_time + params.auto_check_overhead


def reduction_ratio(params: CostParams) -> float:
    """alpha = 1 - auto_cost / manual_cost; always in (0, 1)."""
    return 1.0 - auto_cost(params) / manual_cost(params)


def approx_alpha(video_time: float, stage1_overhead: float, stage2_overhead: float) -> float:
    """Approximate alpha assuming S3 ~ S3': (2 + r) / (3 + r) with r = (S1+S2)/T.

    Increasing in r; equals 0.8 exactly at r = 2 and tends to 2/3 as the
    video dominates the overheads (r -> 0).
    """
    t = _require_positive("video_time", video_time)
    s1 = _require_positive("stage1_overhead", stage1_overhead)
    s2 = _require_positive("stage2_overhead", stage2_overhead)
    r = (s1 + s2) / t
    return (2 + r) / (3 + r)


def average_alpha(class_alphas) -> float:
    """Mean reduction over the three duration classes.

    Expects exactly one alpha per class (short, medium, long), each in (0, 1).
    """
    values = tuple(class_alphas)
    if len(values) != 3:
        raise NemoforgeError(f"average_alpha needs one value per duration class, got {len(values)}")
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
            raise NemoforgeError(f"alpha[{i}] must be a finite number, got {v!r}")
        if not (0 < float(v) < 1):
            raise NemoforgeError(f"alpha[{i}] must lie in (0, 1), got {v!r}")
    return sum(values) / 3


def cost_summary(params: CostParams) -> dict:
    """All cost figures for one parameter set, ready for JSON output."""
    return {
        "manual_cost": manual_cost(params),
        "auto_cost": auto_cost(params),
        "reduction_ratio": reduction_ratio(params),
        "approx_alpha": approx_alpha(params.video_time, params.stage1_overhead, params.stage2_overhead),
    }
