"""Needle grounding QA generation and self-verification.

One eligible (scene, object) target yields either zero QA pairs (the
annotator skipped or verification failed) or exactly two: an object
question instantiated from a template pool and a scene question taken
verbatim from the annotator, sharing the same ground-truth intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .clients import CompletionClient, CompletionRequest, RetryPolicy, call_with_retries, frame_refs_for
from .core import (
    Montage,
    NeedleGroundingQA,
    NeedleType,
    Provenance,
    TimeInterval,
    classify_duration,
    needle_count_class_for,
)
from .errors import MalformedResponseError, NemoforgeError
from .representation import ObjectTable, SceneTable
from .seeding import derive_rng, stable_digest
from .synthesis import needle_interval_in_montage

GENERATION_FRAME_COUNT = 8
VERIFICATION_POSITIVE_FRAMES = 8
VERIFICATION_NEGATIVE_FRAMES = 8

SKIP_TOKEN = "NONE"

GENERATION_PROMPT_TEMPLATE = """\
Please help me generate a scene description, a question based on the scene description for the scene needle grounding problem, and an object description for building questions about object needle grounding.
There are {frame num} frames from a video. Based on the object in the red bounding box, the category of the object, the noisy description of the object, and the noisy subtitles of the video which may not reflect the visual information of this frame, generate the whole scene description, the corresponding question for scene needle grounding problem and the concrete object description that can help people quickly identify this object.
Object Category: {category}
Noisy Object Description: {desc}
Subtitle: {subtitle text}
The provided object should be concrete, specific, and identifiable. If the current object belongs to an abstract or overly broad category that is not suitable for object needle grounding tasks, like the sky, sidewalk, slope, etc., please ignore the below instructions and output "NONE" only to skip.
The output should consist of three lines, separated by a newline:
1. A clear scene description, starting with "Scene: ".
2. The corresponding question based on the scene description, starting with "Scene Question: ".
3. A concrete object description, starting with "Object: ".
**Restriction Policies**:
- Use the provided object description and subtitle selectively, as they may contain noise.
- The scene description should clearly depict the context where the object is in.
- The scene description should be a complete sentence.
- The scene description should not contain any information that can only be obtained from subtitles.
- The question should contain the above scene description and ask when this scene was shown in the video.
- The object description should clearly identify the object based on its appearance or context to avoid any ambiguity without referencing bounding boxes. Please do not use the provided noisy object description directly. The data may be correct or may contain errors, so you need to observe the frames yourself and think critically to determine if the data is verifiable.
- The object description should be a noun phrase.
- Do not use "red bounding box", "image", or "frame" in the answer.
- Do not include any additional information or explanations.
- Use proper noun phrases when necessary instead of giving general descriptions.
Video Frames:
"""

VERIFICATION_PROMPT_TEMPLATE = """\
Please help me validate whether the object description uniquely refers to the object in the red bounding box.
Given an object description, a scene description, and some frames from a video, where the first {positive frame number} frames contain the same object marked with a red bounding box. The remaining {negative frame number} frames are sampled from the same video.
Object Description: {object description}
Scene Description: {scene description}
The output should consist of two lines, each separated by a newline:
 - In the first line, you should perform the reasoning and inference process for the validation.
 - In the second line, you should state if the data is valid based on the previous reasoning process, using only 'yes' or 'no'.
Validation Requirements:
 1. Ensure the object description can unambiguously identify the object in the red bounding box based on its appearance or context.
 2. Ensure The object description does not refer to any objects in the remaining frames.
 3. Ensure the scene description is consistent with the frames with the red bounding box.
 4. Ensure the scene description does not contain any information that can only be obtained from the subtitles.
 5. Ensure the remaining frames do not match the scene description.
Important Notes:
 - Please do not have any prior assumptions about the data quality. The data may be correct or may contain errors, so you need to observe the video yourself and think critically to determine if the data is verifiable.
 - Make sure the output should be no more than 50 words.
The first {positive frame number} frames which contain the object in the red bounding box: <interleaved>
The remaining {negative frame number} frames:
"""

OBJECT_QUESTION_TEMPLATES = (
    "When does {object description} show in the video?",
    "At what time does {object description} appear in the video?",
    "When does {object description} appear in the video?",
    "When can we see {object description} in the video?",
    "At what time in the video is {object description} visible?",
    "When is {object description} displayed in the video?",
    "What is the timing of {object description}'s appearance in the video?",
    "When in the video does {object description} make an appearance?",
    "Can you pinpoint when {object description} is shown in the video?",
    "When does the video feature {object description}?",
)


def build_generation_prompt(category: str, noisy_description: str, subtitle: str, frame_count: int) -> str:
    """Fill the generation prompt; descriptions are substituted verbatim."""
    if frame_count < 1:
        raise NemoforgeError(f"frame_count must be >= 1, got {frame_count}")
    return (
        GENERATION_PROMPT_TEMPLATE
        .replace("{frame num}", str(frame_count))
        .replace("{category}", category)
        .replace("{desc}", noisy_description)
        .replace("{subtitle text}", subtitle)
    )


def build_verification_prompt(
    object_description: str,
    scene_description: str,
    positive_frame_count: int,
    negative_frame_count: int,
) -> str:
    """Fill the self-verification prompt."""
    if positive_frame_count < 1 or negative_frame_count < 1:
        raise NemoforgeError("verification needs at least one positive and one negative frame")
    return (
        VERIFICATION_PROMPT_TEMPLATE
        .replace("{positive frame number}", str(positive_frame_count))
        .replace("{negative frame number}", str(negative_frame_count))
        .replace("{object description}", object_description)
        .replace("{scene description}", scene_description)
    )


def instantiate_object_question(object_description: str, template_index: int) -> str:
    """Render one of the object-question templates."""
    if not (0 <= template_index < len(OBJECT_QUESTION_TEMPLATES)):
        raise NemoforgeError(
            f"template_index must be in [0, {len(OBJECT_QUESTION_TEMPLATES) - 1}], got {template_index}"
        )
    return OBJECT_QUESTION_TEMPLATES[template_index].replace("{object description}", object_description)


@dataclass(frozen=True)
class GenerationResult:
    """Parsed generation reply; `skipped` means the annotator answered NONE."""

    scene_description: str
    scene_question: str
    object_description: str
    skipped: bool

    def __post_init__(self):
        if self.skipped:
            return
        for name, value in (
            ("scene_description", self.scene_description),
            ("scene_question", self.scene_question),
            ("object_description", self.object_description),
        ):
            if not value:
                raise MalformedResponseError(f"generation result has empty {name}")


_GENERATION_LABELS = (
    ("Scene: ", "scene_description"),
    ("Scene Question: ", "scene_question"),
    ("Object: ", "object_description"),
)


def parse_generation_response(text: str) -> GenerationResult:
    """Parse the three labeled lines of a generation reply, or a NONE skip."""
    body = text.strip()
    if body == SKIP_TOKEN:
        return GenerationResult("", "", "", skipped=True)
    found: dict[str, str] = {}
    for raw_line in body.splitlines():
        line = raw_line.strip()
        # check the longer label first so "Scene Question: " never falls into "Scene: "
        if line.startswith("Scene Question: "):
            found.setdefault("scene_question", line[len("Scene Question: "):].strip())
        elif line.startswith("Scene: "):
            found.setdefault("scene_description", line[len("Scene: "):].strip())
        elif line.startswith("Object: "):
            found.setdefault("object_description", line[len("Object: "):].strip())
    missing = [label for label, key in _GENERATION_LABELS if key not in found or not found[key]]
    if missing:
        raise MalformedResponseError(
            f"generation reply is missing line(s) {missing}", raw_text=text
        )
    return GenerationResult(
        scene_description=found["scene_description"],
        scene_question=found["scene_question"],
        object_description=found["object_description"],
        skipped=False,
    )


def parse_verification_response(text: str) -> tuple[str, bool]:
    """Split a verification reply into (reasoning, verdict).

    The verdict is the last non-empty line, lowercased and stripped; it
    must be exactly "yes" or "no".
    """
    lines = [line for line in text.splitlines()]
    nonempty = [i for i, line in enumerate(lines) if line.strip()]
    if not nonempty:
        raise MalformedResponseError("verification reply is empty", raw_text=text)
    last = nonempty[-1]
    verdict = lines[last].strip().lower()
    if verdict not in ("yes", "no"):
        raise MalformedResponseError(
            f"verification verdict must be yes or no, got {lines[last].strip()!r}", raw_text=text
        )
    reasoning = "\n".join(lines[:last]).strip()
    return reasoning, verdict == "yes"


def uniform_frame_times(interval: TimeInterval, count: int) -> list[float]:
    """`count` timestamps evenly spread over an interval, endpoints included."""
    if count < 1:
        raise NemoforgeError(f"count must be >= 1, got {count}")
    if count == 1:
        return [interval.start]
    step = interval.length / (count - 1)
    return [interval.start + i * step for i in range(count)]


def negative_frame_times(montage: Montage, needle_intervals: Sequence[TimeInterval], count: int) -> list[float]:
    """Timestamps spread evenly over the montage outside the needle intervals."""
    spans: list[tuple[float, float]] = []
    cursor = 0.0
    for iv in sorted(needle_intervals, key=lambda iv: iv.start):
        if iv.start > cursor:
            spans.append((cursor, iv.start))
        cursor = max(cursor, iv.end)
    if cursor < montage.total_duration:
        spans.append((cursor, montage.total_duration))
    if not spans:
        raise NemoforgeError(f"montage {montage.montage_id} has no footage outside the needles")
    total = sum(end - start for start, end in spans)
    times = []
    for i in range(count):
        # midpoint positions along the concatenated negative footage
        pos = (i + 0.5) * total / count
        for start, end in spans:
            span = end - start
            if pos <= span:
                times.append(start + pos)
                break
            pos -= span
        else:
            times.append(spans[-1][1])
    return times


class StubAnnotator:
    """Deterministic offline annotator for tests and dry runs.

    Generation replies are derived from the request metadata; categories
    in `skip_tags` are answered with NONE and categories in `reject_tags`
    fail verification.
    """

    def __init__(self, skip_tags: Sequence[str] = (), reject_tags: Sequence[str] = ()):
        self.skip_tags = {t.casefold() for t in skip_tags}
        self.reject_tags = {t.casefold() for t in reject_tags}
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        self.calls += 1
        meta = request.metadata
        category = str(meta.get("category", "")).casefold()
        if request.prompt.startswith("Please help me validate"):
            verdict = "no" if category in self.reject_tags else "yes"
            return f"The description was checked against both frame groups.\n{verdict}"
        if category in self.skip_tags:
            return SKIP_TOKEN
        subtitle = str(meta.get("subtitle", "")).strip()
        desc = str(meta.get("noisy_description", "")) or f"a {meta.get('category', 'thing')}"
        if subtitle:
            scene = f"A scene where {subtitle.rstrip('.')} while {desc} is visible."
        else:
            scene = f"A scene featuring {desc}."
        question = f"When does this scene appear in the video: {scene}"
        return f"Scene: {scene}\nScene Question: {question}\nObject: {desc}"


def generate_qa(
    annotator: CompletionClient,
    target: tuple[SceneTable, ObjectTable],
    montage: Montage,
    seed: int,
    retry: RetryPolicy = RetryPolicy(),
) -> list[NeedleGroundingQA]:
    """Generate and self-verify the QA pair for one montage target.

    Returns [] when the annotator skips the object or verification says
    no; otherwise exactly two QA records (object and scene) sharing the
    target's ground-truth intervals.
    """
    scene, obj = target
    ground_truth = tuple(needle_interval_in_montage(montage, scene.scene_id))

    gen_times = uniform_frame_times(ground_truth[0], GENERATION_FRAME_COUNT)
    gen_request = CompletionRequest(
        prompt=build_generation_prompt(obj.tag, obj.referring_expression, scene.subtitles, GENERATION_FRAME_COUNT),
        frame_refs=frame_refs_for(montage.montage_id, gen_times),
        metadata={
            "kind": "generation",
            "frame_count": GENERATION_FRAME_COUNT,
            "category": obj.tag,
            "noisy_description": obj.referring_expression,
            "subtitle": scene.subtitles,
        },
    )
    generation = parse_generation_response(call_with_retries(annotator, gen_request, retry))
    if generation.skipped:
        return []

    positive_times = uniform_frame_times(ground_truth[0], VERIFICATION_POSITIVE_FRAMES)
    negative_times = negative_frame_times(montage, ground_truth, VERIFICATION_NEGATIVE_FRAMES)
    verify_request = CompletionRequest(
        prompt=build_verification_prompt(
            generation.object_description,
            generation.scene_description,
            VERIFICATION_POSITIVE_FRAMES,
            VERIFICATION_NEGATIVE_FRAMES,
        ),
        frame_refs=frame_refs_for(montage.montage_id, sorted(positive_times + negative_times)),
        metadata={
            "kind": "verification",
            "category": obj.tag,
            "positive_frames": VERIFICATION_POSITIVE_FRAMES,
            "negative_frames": VERIFICATION_NEGATIVE_FRAMES,
        },
    )
    _, valid = parse_verification_response(call_with_retries(annotator, verify_request, retry))
    if not valid:
        return []

    rng = derive_rng(seed, "object-template", montage.montage_id, scene.scene_id, obj.object_id)
    template_index = rng.randrange(len(OBJECT_QUESTION_TEMPLATES))
    object_question = instantiate_object_question(generation.object_description, template_index)

    base = stable_digest(montage.montage_id, scene.scene_id, obj.object_id)
    duration_class = classify_duration(montage.total_duration)
    count_class = needle_count_class_for(ground_truth)
    common = dict(
        montage_id=montage.montage_id,
        ground_truth=ground_truth,
        duration_class=duration_class,
        needle_count_class=count_class,
        target_object_tag=obj.tag,
        provenance=Provenance.GENERATED,
    )
    return [
        NeedleGroundingQA(qa_id=f"qa-{base}-obj", needle_type=NeedleType.OBJECT, question=object_question, **common),
        NeedleGroundingQA(qa_id=f"qa-{base}-scn", needle_type=NeedleType.SCENE, question=generation.scene_question, **common),
    ]
