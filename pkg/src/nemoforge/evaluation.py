"""Evaluation harness: frame plans, prompt dialects, reply parsing.

Frames are sampled on a 1 FPS grid from t=0; when the grid exceeds a
model's frame budget, indices are retained uniformly with the first and
last frames always kept. Reply parsing is total: any text maps to a
(possibly empty) interval list plus diagnostics, never an exception.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Protocol, Sequence

from .clients import (
    CompletionClient,
    CompletionRequest,
    POLICY_BLOCK_MARKER,
    RetryPolicy,
    call_with_retries,
    frame_refs_for,
)
from .core import DurationClass, Montage, NeedleGroundingQA, TimeInterval, classify_duration
from .errors import NemoforgeError, NotFoundError, TransportError


class PromptStyle(str, Enum):
    VIDEO_FIRST = "VIDEO_FIRST"
    INTERLEAVED_TS = "INTERLEAVED_TS"
    QWEN = "QWEN"
    TIMER1 = "TIMER1"


# Published frame budgets per model; Qwen-VL-Max varies by duration class.
DEFAULT_MAX_FRAMES: dict[str, int | dict[DurationClass, int]] = {
    "llava-video-7b": 64,
    "llava-video-72b": 64,
    "minicpm-v2.6-8b": 64,
    "longva-7b": 128,
    "oryx-34b": 128,
    "qwen2.5-vl-7b": 768,
    "qwen2.5-vl-72b": 768,
    "time-r1-3b": 768,
    "time-r1-7b": 768,
    "vila1.5-13b": 1024,
    "vila1.5-40b": 1024,
    "longvu-7b": 3600,
    "et-chat-3.8b": 3600,
    "gpt-4o": 160,
    "gemini-1.5-pro-002": 3600,
    "gemini-1.5-flash-002": 3600,
    "gemini-1.5-flash-8b": 3600,
    "qwen-vl-max": {
        DurationClass.SHORT: 350,
        DurationClass.MEDIUM: 350,
        DurationClass.LONG: 330,
    },
}

DEFAULT_REFUSAL_PHRASES = (
    "i can't assist",
    "i cannot assist",
    "i can't help with",
    "i cannot help with",
    "i'm sorry, i can't",
    "i am sorry, i can't",
    "i'm unable to",
    "i am unable to",
    "i won't be able to",
    "cannot fulfill this request",
    "against my guidelines",
)


def resolve_max_frames(model_id: str, duration_class: DurationClass, override: int | None = None) -> int | None:
    """Frame budget for a model, honoring per-duration-class defaults."""
    if override is not None:
        return override
    budget = DEFAULT_MAX_FRAMES.get(model_id)
    if isinstance(budget, dict):
        return budget[duration_class]
    return budget


@dataclass(frozen=True)
class FramePlan:
    """Timestamps (seconds) at which frames are sampled from a montage."""

    timestamps: tuple[float, ...]
    fps: float
    max_frames: int

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        prev = None
        for t in self.timestamps:
            if prev is not None and t <= prev:
                raise NemoforgeError(f"frame plan timestamps must strictly ascend ({prev} then {t})")
            prev = t


def plan_frame_samples(duration: float, fps: float, max_frames: int) -> FramePlan:
    """Sample times on the fps grid from 0.0, thinned to max_frames.

    The grid holds ceil(duration * fps) frames at i/fps. When thinning,
    retained grid indices are spread uniformly and always include the
    first and the last grid frame.
    """
    if not math.isfinite(duration) or duration <= 0:
        raise NemoforgeError(f"duration must be finite and positive, got {duration!r}")
    if fps <= 0:
        raise NemoforgeError(f"fps must be positive, got {fps!r}")
    if max_frames < 1:
        raise NemoforgeError(f"max_frames must be >= 1, got {max_frames}")
    grid_size = math.ceil(duration * fps)
    if grid_size <= max_frames:
        indices = range(grid_size)
    elif max_frames == 1:
        indices = [0]
    else:
        span = grid_size - 1
        indices = [round(j * span / (max_frames - 1)) for j in range(max_frames)]
    return FramePlan(timestamps=tuple(i / fps for i in indices), fps=fps, max_frames=max_frames)


def _format_time(t: float) -> str:
    if t == int(t):
        return f"{t:.1f}"
    return repr(float(t))


def _times_line(plan: FramePlan) -> str:
    return ", ".join(f"{_format_time(t)}s" for t in plan.timestamps)


_SINGLE_NOTE = (
    "Note:\n"
    "1. Your response should be a single line. Each line follows the format as "
    "\"Answer: [start_time] - [end_time]\", where the [start_time] and [end_time] mean "
    "the start time and end time of the object or scene in this video, respectively.\n"
    "2. There may be single or multiple possible time intervals. Please list them all "
    "by following the previous time format, separated by \",\"."
)

_BATCH_NOTE_TEMPLATE = (
    "Note:\n"
    "1. Your response should be {question_num} line(s). Each line follows the format as "
    "\"Answer: [question_idx] [start_time] - [end_time]\", where the [question_idx] means "
    "the answer to the index of question answered, [start_time] and [end_time] mean the "
    "start time and end time of the object or scene queried shown in this video, respectively.\n"
    "2. For each question, there may be single or multiple possible time intervals. "
    "Please list them all by following the previous time format separated by \",\"."
)


def _interleaved_frame_lines(plan: FramePlan) -> str:
    return "\n".join(
        f"Frame {i} (sampled at {_format_time(t)}s)" for i, t in enumerate(plan.timestamps)
    )


def build_eval_prompt(style: PromptStyle, question: str, plan: FramePlan) -> str:
    """Render the single-question prompt for a dialect."""
    if not question or not question.strip():
        raise NemoforgeError("question must be non-empty")
    total = len(plan.timestamps)
    fps = _format_time(plan.fps) if plan.fps != int(plan.fps) else str(int(plan.fps))
    if style == PromptStyle.VIDEO_FIRST:
        return (
            f"There are {total} frames from a video with a frame rate of {fps} FPS. "
            f"The frames were taken at the following times: {_times_line(plan)}\n"
            "Carefully watch the video and answer the question.\n"
            f"Question: {question}\n"
            f"{_SINGLE_NOTE}"
        )
    if style == PromptStyle.INTERLEAVED_TS:
        return (
            f"There are {total} frames from a video with a frame rate of {fps} FPS.\n"
            f"{_interleaved_frame_lines(plan)}\n"
            "Carefully watch the video and answer the question.\n"
            f"Question: {question}\n"
            f"{_SINGLE_NOTE}"
        )
    if style == PromptStyle.QWEN:
        return (
            f"Given the query: {question}, when does the described content occur in the video? "
            "Answer with \"mm:ss.ff - mm:ss.ff\" time format for time depiction directly. "
            "For example: \"00:10.00 - 00:12.60\"."
        )
    if style == PromptStyle.TIMER1:
        return (
            "You are a helpful assistant.\n"
            f"Question: To accurately pinpoint the event {question} in the video, determine "
            "the precise time period of the event.\n"
            "Output your thought process within the <think> </think> tags, including analysis "
            "with either specific time ranges (xx.xx to xx.xx) in <timestep> </timestep> tags.\n"
            "Then, provide the start and end times (in seconds, precise to two decimal places) "
            "in the format \"start time to end time\" within the <answer> </answer> tags. "
            "For example: \"12.54 to 17.83\". Note there might be multiple time ranges, "
            "please list all the time ranges in the <answer> </answer> tags."
        )
    raise NemoforgeError(f"unknown prompt style {style!r}")


def build_batch_prompt(style: PromptStyle, questions: Sequence[str], plan: FramePlan) -> str:
    """Render the indexed multi-question prompt (questions numbered from 1)."""
    if not questions:
        raise NemoforgeError("batch prompt needs at least one question")
    if style not in (PromptStyle.VIDEO_FIRST, PromptStyle.INTERLEAVED_TS):
        raise NemoforgeError(f"batch prompts support VIDEO_FIRST and INTERLEAVED_TS, not {style.value}")
    total = len(plan.timestamps)
    fps = _format_time(plan.fps) if plan.fps != int(plan.fps) else str(int(plan.fps))
    n = len(questions)
    numbered = "\n".join(f"{i + 1}. {q}" for i, q in enumerate(questions))
    note = _BATCH_NOTE_TEMPLATE.replace("{question_num}", str(n))
    if style == PromptStyle.VIDEO_FIRST:
        header = (
            f"There are {total} frames from a video with a frame rate of {fps} FPS. "
            f"The frames were taken at the following times: {_times_line(plan)}\n"
        )
    else:
        header = (
            f"There are {total} frames from a video with a frame rate of {fps} FPS.\n"
            f"{_interleaved_frame_lines(plan)}\n"
        )
    return (
        f"{header}"
        f"Carefully watch the video and answer the following {n} question(s).\n"
        f"Questions:\n{numbered}\n"
        f"{note}"
    )


_RANGE_DASH = re.compile(r"(\d+(?:\.\d+)?)\s*-\s*(\d+(?:\.\d+)?)")
_RANGE_TO = re.compile(r"(\d+(?:\.\d+)?)\s*to\s*(\d+(?:\.\d+)?)", re.IGNORECASE)
_RANGE_MMSS = re.compile(r"(\d{1,4}):(\d{2}(?:\.\d+)?)\s*-\s*(\d{1,4}):(\d{2}(?:\.\d+)?)")
_ANSWER_BLOCK = re.compile(r"<answer>(.*?)(?:</answer>|$)", re.IGNORECASE | re.DOTALL)
_BATCH_LINE = re.compile(r"^\s*(?:Answer:\s*)?(\d+)[.):\]]?\s+(.*\d\s*-\s*\d.*)$")


@dataclass(frozen=True)
class ParsedPrediction:
    """Intervals extracted from one reply plus parse diagnostics."""

    intervals: tuple[TimeInterval, ...]
    swapped_count: int = 0

    @property
    def parse_ok(self) -> bool:
        return bool(self.intervals)


def _pairs_to_prediction(pairs: Sequence[tuple[float, float]]) -> ParsedPrediction:
    intervals = []
    swapped = 0
    for a, b in pairs:
        if a > b:
            a, b = b, a
            swapped += 1
        intervals.append(TimeInterval(a, b))
    return ParsedPrediction(intervals=tuple(intervals), swapped_count=swapped)


def parse_prediction(raw: str, style: PromptStyle) -> ParsedPrediction:
    """Extract every time range a reply states, tolerant of surrounding prose.

    Reversed ranges are swapped into order and counted. No extractable
    range yields an empty, parse_ok=False result; never an exception.
    """
    text = raw or ""
    if style == PromptStyle.QWEN:
        # sum minutes and seconds as exact decimals, rounding to float once
        pairs = [
            (float(int(m1) * 60 + Fraction(s1)), float(int(m2) * 60 + Fraction(s2)))
            for m1, s1, m2, s2 in _RANGE_MMSS.findall(text)
        ]
        return _pairs_to_prediction(pairs)
    if style == PromptStyle.TIMER1:
        pairs = []
        for block in _ANSWER_BLOCK.findall(text):
            pairs.extend((float(a), float(b)) for a, b in _RANGE_TO.findall(block))
        return _pairs_to_prediction(pairs)
    pairs = [(float(a), float(b)) for a, b in _RANGE_DASH.findall(text)]
    return _pairs_to_prediction(pairs)


@dataclass(frozen=True)
class BatchParse:
    """Per-question parses of an indexed batch reply (1-based indices)."""

    per_question: Mapping[int, ParsedPrediction]
    anomalies: tuple[str, ...] = ()


def parse_batch_prediction(raw: str, question_count: int, style: PromptStyle = PromptStyle.VIDEO_FIRST) -> BatchParse:
    """Parse "Answer: [idx] [start] - [end]" lines into per-question results.

    Questions whose index never appears get an empty, parse_ok=False
    entry; out-of-range indices are skipped and recorded as anomalies.
    """
    if question_count < 1:
        raise NemoforgeError(f"question_count must be >= 1, got {question_count}")
    found: dict[int, ParsedPrediction] = {}
    anomalies: list[str] = []
    for line in (raw or "").splitlines():
        match = _BATCH_LINE.match(line)
        if not match:
            continue
        idx = int(match.group(1))
        parsed = parse_prediction(match.group(2), style)
        if not parsed.intervals:
            continue
        if not (1 <= idx <= question_count):
            anomalies.append(f"answer index {idx} out of range 1..{question_count}")
            continue
        if idx in found:
            merged = ParsedPrediction(
                intervals=found[idx].intervals + parsed.intervals,
                swapped_count=found[idx].swapped_count + parsed.swapped_count,
            )
            found[idx] = merged
        else:
            found[idx] = parsed
    per_question = {
        i: found.get(i, ParsedPrediction(intervals=(), swapped_count=0))
        for i in range(1, question_count + 1)
    }
    return BatchParse(per_question=per_question, anomalies=tuple(anomalies))


def _format_seconds(value: float) -> str:
    return repr(float(value))


def _format_mmss(value: float) -> str:
    total_cs = round(value * 100)
    minutes, cs = divmod(total_cs, 6000)
    return f"{minutes:02d}:{cs / 100:05.2f}"


def format_prediction(intervals: Sequence[TimeInterval], style: PromptStyle) -> str:
    """Render intervals in a dialect's answer format (round-trips with parsing)."""
    if style == PromptStyle.QWEN:
        return ", ".join(f"{_format_mmss(iv.start)} - {_format_mmss(iv.end)}" for iv in intervals)
    if style == PromptStyle.TIMER1:
        body = ", ".join(f"{iv.start:.2f} to {iv.end:.2f}" for iv in intervals)
        return f"<answer>{body}</answer>"
    body = ", ".join(f"{_format_seconds(iv.start)} - {_format_seconds(iv.end)}" for iv in intervals)
    return f"Answer: {body}"


def format_batch_prediction(per_question: Mapping[int, Sequence[TimeInterval]], style: PromptStyle = PromptStyle.VIDEO_FIRST) -> str:
    """Render an indexed batch answer, one line per question."""
    lines = []
    for idx in sorted(per_question):
        body = ", ".join(
            f"{_format_seconds(iv.start)} - {_format_seconds(iv.end)}" for iv in per_question[idx]
        )
        lines.append(f"Answer: {idx} {body}")
    return "\n".join(lines)


def detect_refusal(raw: str, phrases: Sequence[str] | None = None) -> bool:
    """True for empty replies, policy-block markers, or refusal phrases."""
    if raw is None or not raw.strip():
        return True
    if POLICY_BLOCK_MARKER in raw:
        return True
    lowered = raw.casefold()
    for phrase in phrases if phrases is not None else DEFAULT_REFUSAL_PHRASES:
        if phrase.casefold() in lowered:
            return True
    return False


@dataclass(frozen=True)
class PredictionRecord:
    """One model reply, parsed and clipped, ready for scoring."""

    qa_id: str
    model_id: str
    raw_text: str
    intervals: tuple[TimeInterval, ...]
    refusal: bool
    parse_ok: bool
    diagnostics: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.refusal and self.intervals:
            raise NemoforgeError(f"record {self.qa_id}: refusals cannot carry intervals")
        if not self.parse_ok and self.intervals:
            raise NemoforgeError(f"record {self.qa_id}: parse_ok=False requires empty intervals")

    def to_json_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "model_id": self.model_id,
            "raw_text": self.raw_text,
            "intervals": [iv.to_json_dict() for iv in self.intervals],
            "refusal": self.refusal,
            "parse_ok": self.parse_ok,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "PredictionRecord":
        return cls(
            qa_id=data["qa_id"],
            model_id=data.get("model_id", ""),
            raw_text=data.get("raw_text", ""),
            intervals=tuple(TimeInterval.from_json_dict(iv) for iv in data.get("intervals", [])),
            refusal=bool(data.get("refusal", False)),
            parse_ok=bool(data.get("parse_ok", False)),
            diagnostics=dict(data.get("diagnostics", {})),
        )


def clip_intervals(intervals: Sequence[TimeInterval], duration: float) -> tuple[TimeInterval, ...]:
    """Clamp intervals into [0, duration]."""
    out = []
    for iv in intervals:
        start = min(max(iv.start, 0.0), duration)
        end = min(max(iv.end, 0.0), duration)
        out.append(TimeInterval(start, end))
    return tuple(out)


@dataclass(frozen=True)
class EvalConfig:
    """Harness settings for one evaluation run."""

    model_id: str
    style: PromptStyle = PromptStyle.VIDEO_FIRST
    fps: float = 1.0
    max_frames: int | None = None
    batch: bool = False
    refusal_phrases: tuple[str, ...] | None = None
    retry: RetryPolicy = RetryPolicy()


class ModelClient(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


def _record(
    qa: NeedleGroundingQA,
    montage: Montage,
    config: EvalConfig,
    raw: str,
    parsed: ParsedPrediction,
    extra: dict | None = None,
) -> PredictionRecord:
    refusal = detect_refusal(raw, config.refusal_phrases)
    diagnostics: dict[str, object] = {"swapped": parsed.swapped_count}
    if extra:
        diagnostics.update(extra)
    if refusal:
        return PredictionRecord(
            qa_id=qa.qa_id,
            model_id=config.model_id,
            raw_text=raw,
            intervals=(),
            refusal=True,
            parse_ok=False,
            diagnostics=diagnostics,
        )
    intervals = clip_intervals(parsed.intervals, montage.total_duration)
    return PredictionRecord(
        qa_id=qa.qa_id,
        model_id=config.model_id,
        raw_text=raw,
        intervals=intervals,
        refusal=False,
        parse_ok=bool(intervals),
        diagnostics=diagnostics,
    )


def _failure_record(qa: NeedleGroundingQA, config: EvalConfig, error: str) -> PredictionRecord:
    return PredictionRecord(
        qa_id=qa.qa_id,
        model_id=config.model_id,
        raw_text="",
        intervals=(),
        refusal=False,
        parse_ok=False,
        diagnostics={"error": error},
    )


def run_evaluation(
    model_client: ModelClient,
    dataset: Sequence[NeedleGroundingQA],
    montages: Mapping[str, Montage],
    config: EvalConfig,
) -> list[PredictionRecord]:
    """Evaluate a model over a QA dataset; one record per QA, ordered by qa_id.

    With config.batch, QA sharing a MEDIUM or LONG montage are asked in a
    single indexed call. Transport failures are retried per the policy and
    then recorded as unparseable answers rather than aborting the run.
    """
    by_montage: dict[str, list[NeedleGroundingQA]] = {}
    for qa in dataset:
        if qa.montage_id not in montages:
            raise NotFoundError(f"dataset references unknown montage {qa.montage_id}")
        by_montage.setdefault(qa.montage_id, []).append(qa)

    records: list[PredictionRecord] = []
    for montage_id in sorted(by_montage):
        montage = montages[montage_id]
        group = sorted(by_montage[montage_id], key=lambda qa: qa.qa_id)
        duration_class = classify_duration(montage.total_duration)
        budget = resolve_max_frames(config.model_id, duration_class, config.max_frames)
        if budget is None:
            raise NemoforgeError(
                f"no frame budget known for model {config.model_id!r}; pass max_frames"
            )
        plan = plan_frame_samples(montage.total_duration, config.fps, budget)
        refs = frame_refs_for(montage_id, plan.timestamps)

        use_batch = config.batch and len(group) > 1 and duration_class != DurationClass.SHORT
        if use_batch:
            prompt = build_batch_prompt(config.style, [qa.question for qa in group], plan)
            request = CompletionRequest(
                prompt=prompt,
                frame_refs=refs,
                metadata={"montage_id": montage_id, "qa_ids": [qa.qa_id for qa in group]},
            )
            try:
                raw = call_with_retries(model_client, request, config.retry)
            except TransportError as exc:
                records.extend(_failure_record(qa, config, str(exc)) for qa in group)
                continue
            if detect_refusal(raw, config.refusal_phrases):
                for qa in group:
                    records.append(_record(qa, montage, config, raw, ParsedPrediction(intervals=())))
                continue
            batch = parse_batch_prediction(raw, len(group), config.style)
            for i, qa in enumerate(group, start=1):
                extra = {"batch": True}
                if batch.anomalies:
                    extra["batch_anomalies"] = list(batch.anomalies)
                records.append(_record(qa, montage, config, raw, batch.per_question[i], extra))
        else:
            for qa in group:
                prompt = build_eval_prompt(config.style, qa.question, plan)
                request = CompletionRequest(
                    prompt=prompt,
                    frame_refs=refs,
                    metadata={"montage_id": montage_id, "qa_id": qa.qa_id},
                )
                try:
                    raw = call_with_retries(model_client, request, config.retry)
                except TransportError as exc:
                    records.append(_failure_record(qa, config, str(exc)))
                    continue
                records.append(_record(qa, montage, config, raw, parse_prediction(raw, config.style)))

    records.sort(key=lambda r: r.qa_id)
    return records


class OracleModelClient:
    """Echoes each question's ground truth in the configured dialect."""

    def __init__(self, dataset: Sequence[NeedleGroundingQA], style: PromptStyle):
        self._gt = {qa.qa_id: qa.ground_truth for qa in dataset}
        self._style = style
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        self.calls += 1
        meta = request.metadata
        if "qa_ids" in meta:
            return format_batch_prediction(
                {i + 1: self._gt[qa_id] for i, qa_id in enumerate(meta["qa_ids"])},
                self._style,
            )
        return format_prediction(self._gt[meta["qa_id"]], self._style)


class EmptyModelClient:
    """Always answers with empty text (reads as a refusal downstream)."""

    def __init__(self):
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        self.calls += 1
        return ""


class ScriptedModelClient:
    """Replays canned replies keyed by qa_id (or montage_id for batches)."""

    def __init__(self, replies: Mapping[str, str], default: str = ""):
        self.replies = dict(replies)
        self.default = default
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        self.calls += 1
        meta = request.metadata
        key = meta.get("qa_id") or meta.get("montage_id")
        return self.replies.get(key, self.default)
