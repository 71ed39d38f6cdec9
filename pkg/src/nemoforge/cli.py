"""Command-line pipeline driver.

Settings resolve flag > NEMOFORGE_* environment > config file > default.
Logs go to stderr; every data artifact is a file (or stdout for the
single-value commands). Outputs are deterministic per seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .clients import HttpCompletionClient, RetryPolicy
from .core import DurationClass, Montage, NeedleCountClass, NeedleGroundingQA
from .cost import CostParams, cost_summary
from .errors import (
    ContaminationError,
    IneligibleError,
    NemoforgeError,
    NotFoundError,
    PoolExhaustedError,
    UsageError,
)
from .evaluation import (
    EmptyModelClient,
    EvalConfig,
    OracleModelClient,
    PredictionRecord,
    PromptStyle,
    clip_intervals,
    run_evaluation,
)
from .expansion import attach_additional_qa, choose_split_count, extend_montage, register_needles, split_to_multi_needle
from .jsonl import read_records, write_records
from .metrics import aggregate_report, recall_at_kx, average_map, render_report_text, score_sample
from .qa_gen import StubAnnotator, generate_qa
from .representation import (
    VideoRepresentation,
    dump_corpus,
    eligible_target_scenes,
    load_corpus,
    scenes_without_tag,
)
from .seeding import derive_rng, derive_seed
from .stats import compute_stats, render_stats_text
from .synthesis import SynthesisConfig, compose_montage, needle_interval_in_montage

ENV_PREFIX = "NEMOFORGE_"


def _log(message: str) -> None:
    print(message, file=sys.stderr)


class Settings:
    """Layered configuration: CLI flag > environment > config file > default."""

    def __init__(self, config_path: str | None):
        self.file_values: dict[str, str] = {}
        if config_path:
            path = Path(config_path)
            if not path.exists():
                raise UsageError(f"config file {config_path} does not exist")
            for raw in path.read_text(encoding="utf-8").splitlines():
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"config line is not KEY=VALUE: {raw!r}")
                key, _, value = line.partition("=")
                self.file_values[key.strip().lower()] = value.strip()
        self.resolved: dict[str, object] = {}

    def get(self, name: str, flag_value, default=None, cast=str):
        if flag_value is not None:
            value = flag_value
        else:
            env_value = os.environ.get(ENV_PREFIX + name.upper())
            if env_value is not None:
                value = self._cast(name, env_value, cast)
            elif name in self.file_values:
                value = self._cast(name, self.file_values[name], cast)
            else:
                value = default
        self.resolved[name] = value
        return value

    @staticmethod
    def _cast(name: str, raw: str, cast):
        if cast is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise UsageError(f"setting {name} must be boolean, got {raw!r}")
        try:
            return cast(raw)
        except ValueError as exc:
            raise UsageError(f"setting {name} has invalid value {raw!r}: {exc}") from exc


def _print_config_and_exit(settings: Settings) -> int:
    print(json.dumps(settings.resolved, indent=2, sort_keys=True, default=str))
    return 0


def _load_dataset(path: str) -> list[NeedleGroundingQA]:
    return [NeedleGroundingQA.from_json_dict(rec) for _, rec in read_records(path)]


def _load_montages(path: str) -> dict[str, Montage]:
    montages = {}
    for _, rec in read_records(path):
        montage = Montage.from_json_dict(rec)
        montages[montage.montage_id] = montage
    return montages


def _write_outputs(out_dir: Path, montages: Sequence[Montage], qas: Sequence[NeedleGroundingQA]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records(
        out_dir / "montages.jsonl",
        (m.to_json_dict() for m in sorted(montages, key=lambda m: m.montage_id)),
    )
    write_records(
        out_dir / "qa.jsonl",
        (qa.to_json_dict() for qa in sorted(qas, key=lambda qa: qa.qa_id)),
    )


def _make_annotator(kind: str, settings: Settings, args) -> object:
    if kind == "stub":
        skip = [t for t in (args.skip_tags or "").split(",") if t]
        reject = [t for t in (args.reject_tags or "").split(",") if t]
        return StubAnnotator(skip_tags=skip, reject_tags=reject)
    if kind == "http":
        endpoint = settings.get("endpoint", args.endpoint)
        if not endpoint:
            raise UsageError("an http annotator needs --endpoint")
        return HttpCompletionClient(
            endpoint=endpoint,
            model=settings.get("annotator_model", getattr(args, "annotator_model", None), "") or "",
            token=settings.get("token", args.token, "") or "",
        )
    raise UsageError(f"unknown annotator kind {kind!r}")


def _require_seed(settings: Settings, args) -> int:
    seed = settings.get("seed", args.seed, None, int)
    if seed is None:
        raise UsageError("a seed is required; pass --seed (or set NEMOFORGE_SEED)")
    return int(seed)


def cmd_ingest(args, settings: Settings) -> int:
    input_dir = settings.get("input", args.input)
    output_dir = settings.get("output", args.output)
    if not input_dir or not output_dir:
        raise UsageError("ingest needs --input and --output")
    if args.print_config:
        return _print_config_and_exit(settings)
    corpus = load_corpus(input_dir)
    dump_corpus(corpus, output_dir)
    _log(f"ingested {len(corpus)} video(s) into {output_dir}")
    return 0


def _synthesize_one(
    corpus: Sequence[VideoRepresentation],
    pairs,
    duration_class: DurationClass,
    index: int,
    seed: int,
    annotator,
    retry: RetryPolicy,
):
    """Compose one montage and generate its QA; returns (montage, qas) or None."""
    rng = derive_rng(seed, "pick-target", duration_class.value, index)
    rep, scene, obj = pairs[rng.randrange(len(pairs))]
    negatives = scenes_without_tag(
        corpus,
        obj.tag,
        same_video_only=(duration_class != DurationClass.LONG),
        target_video_id=rep.source_video_id,
    )
    cfg = SynthesisConfig.sample(
        derive_seed(seed, "recipe", duration_class.value, index, scene.scene_id, obj.object_id),
        duration_class,
    )
    montage, _needle = compose_montage((scene, obj), negatives, cfg)
    target_record = {
        "montage_id": montage.montage_id,
        "source_video_id": rep.source_video_id,
        "scene_id": scene.scene_id,
        "object_id": obj.object_id,
    }
    qas = generate_qa(annotator, (scene, obj), montage, seed, retry=retry)
    if not qas:
        return None, target_record
    montage = register_needles(montage, qas)
    return (montage, qas), target_record


def cmd_synthesize(args, settings: Settings) -> int:
    rep_dir = settings.get("rep", args.rep)
    out_dir = settings.get("out", args.out)
    seed = _require_seed(settings, args)
    class_names = settings.get("classes", args.classes, "short")
    per_class = settings.get("per_class", args.per_class, 10, int)
    annotator_kind = settings.get("annotator", args.annotator, "stub")
    if not rep_dir or not out_dir:
        raise UsageError("synthesize needs --rep and --out")
    if args.print_config:
        return _print_config_and_exit(settings)

    corpus = load_corpus(rep_dir)
    pairs = [(rep, scene, obj) for rep in corpus for scene, obj in eligible_target_scenes(rep)]
    if not pairs:
        raise NotFoundError(f"no eligible target scenes in {rep_dir}")
    annotator = _make_annotator(annotator_kind, settings, args)
    retry = RetryPolicy()

    montages: list[Montage] = []
    qas: list[NeedleGroundingQA] = []
    targets: list[dict] = []
    skipped = 0
    for name in class_names.split(","):
        duration_class = DurationClass(name.strip().upper())
        for index in range(per_class):
            try:
                result, target_record = _synthesize_one(
                    corpus, pairs, duration_class, index, seed, annotator, retry
                )
            except (PoolExhaustedError, ContaminationError) as exc:
                _log(f"skip {duration_class.value}[{index}]: {exc}")
                skipped += 1
                continue
            targets.append(target_record)
            if result is None:
                skipped += 1
                continue
            montage, pair_qas = result
            montages.append(montage)
            qas.extend(pair_qas)

    out = Path(out_dir)
    _write_outputs(out, montages, qas)
    write_records(out / "targets.jsonl", sorted(targets, key=lambda t: t["montage_id"]))
    _log(f"synthesized {len(montages)} montage(s), {len(qas)} QA pair(s), skipped {skipped}")
    return 0


def _reps_by_video(corpus: Sequence[VideoRepresentation]) -> dict[str, VideoRepresentation]:
    return {rep.source_video_id: rep for rep in corpus}


def _find_target_object(qa: NeedleGroundingQA, montage: Montage, corpus):
    """Locate the target scene and tagged object a single-needle QA points at."""
    if len(qa.ground_truth) != 1:
        raise IneligibleError("single-needle", f"qa {qa.qa_id} has {len(qa.ground_truth)} needles")
    needle = qa.ground_truth[0]
    offset = 0.0
    target_seg = None
    for seg in montage.segments:
        end = offset + seg.length
        if abs(offset - needle.start) < 1e-9 and abs(end - needle.end) < 1e-9:
            target_seg = seg
            break
        offset = end
    if target_seg is None:
        raise NotFoundError(f"qa {qa.qa_id} ground truth matches no segment")
    rep = _reps_by_video(corpus).get(target_seg.source_video_id)
    if rep is None:
        raise NotFoundError(f"no representation for video {target_seg.source_video_id}")
    scene = rep.scene_by_id(target_seg.scene_id)
    if not qa.target_object_tag:
        raise NotFoundError(f"qa {qa.qa_id} records no target_object_tag")
    for oid in scene.object_table_ids:
        obj = rep.object_by_id(oid)
        if obj.tag.casefold() == qa.target_object_tag.casefold():
            return scene, obj
    raise NotFoundError(f"scene {scene.scene_id} has no object tagged {qa.target_object_tag!r}")


def cmd_expand(args, settings: Settings) -> int:
    qa_path = settings.get("qa", args.qa)
    montages_path = settings.get("montages", args.montages)
    rep_dir = settings.get("rep", args.rep)
    out_dir = settings.get("out", args.out)
    seed = _require_seed(settings, args)
    mode_flags = [bool(args.extend_to), args.multi, args.attach]
    if sum(mode_flags) != 1:
        raise UsageError("expand needs exactly one of --extend-to, --multi, --attach")
    if not qa_path or not montages_path or not rep_dir or not out_dir:
        raise UsageError("expand needs --qa, --montages, --rep, and --out")
    if args.print_config:
        return _print_config_and_exit(settings)

    dataset = _load_dataset(qa_path)
    montages = _load_montages(montages_path)
    corpus = load_corpus(rep_dir)

    new_montages: list[Montage] = []
    new_qas: list[NeedleGroundingQA] = []
    skipped = 0

    if args.extend_to:
        target_class = DurationClass(args.extend_to.strip().upper())
        for qa in dataset:
            try:
                montage, extended = extend_montage(qa, montages[qa.montage_id], corpus, target_class, seed)
            except (IneligibleError, PoolExhaustedError, NotFoundError) as exc:
                _log(f"skip {qa.qa_id}: {exc}")
                skipped += 1
                continue
            new_montages.append(montage)
            new_qas.append(extended)
    elif args.multi:
        for qa in dataset:
            if qa.needle_count_class != NeedleCountClass.SINGLE:
                skipped += 1
                continue
            montage = montages[qa.montage_id]
            try:
                scene, obj = _find_target_object(qa, montage, corpus)
                k = choose_split_count(scene.length, obj.visibility_length, seed, qa.qa_id)
                if k is None:
                    raise IneligibleError("partition", "no feasible split count")
                new_montage, multi_qa = split_to_multi_needle(qa, montage, obj, k, seed)
            except (IneligibleError, NotFoundError) as exc:
                _log(f"skip {qa.qa_id}: {exc}")
                skipped += 1
                continue
            new_montages.append(new_montage)
            new_qas.append(multi_qa)
    else:
        annotator = _make_annotator(settings.get("annotator", args.annotator, "stub"), settings, args)
        scene_index = {scene.scene_id: scene for rep in corpus for scene in rep.scenes}
        seen_montages = {qa.montage_id for qa in dataset}
        for montage_id in sorted(seen_montages):
            montage = montages[montage_id]
            if montage.duration_class != DurationClass.LONG:
                skipped += 1
                continue
            claimed = {
                seg_id
                for qa in dataset
                if qa.montage_id == montage_id
                for seg_id in _claimed_scene_ids(qa, montage)
            }
            extra_targets = []
            for rep in corpus:
                for scene, obj in eligible_target_scenes(rep):
                    if scene.scene_id in claimed or scene.scene_id not in scene_index:
                        continue
                    if not any(seg.scene_id == scene.scene_id for seg in montage.segments):
                        continue
                    others = [seg.scene_id for seg in montage.segments if seg.scene_id != scene.scene_id]
                    if any(scene_index[sid].has_tag(obj.tag) for sid in others):
                        continue
                    extra_targets.append((scene, obj))
            if not extra_targets:
                skipped += 1
                continue
            attached = attach_additional_qa(montage, extra_targets, annotator, seed, scene_index)
            if attached:
                new_montages.append(register_needles(montage, attached))
                new_qas.extend(attached)

    _write_outputs(Path(out_dir), new_montages, new_qas)
    _log(f"expanded into {len(new_qas)} QA pair(s) over {len(new_montages)} montage(s), skipped {skipped}")
    return 0


def _claimed_scene_ids(qa: NeedleGroundingQA, montage: Montage) -> list[str]:
    claimed = []
    offset = 0.0
    for seg in montage.segments:
        end = offset + seg.length
        for iv in qa.ground_truth:
            if abs(offset - iv.start) < 1e-9 and abs(end - iv.end) < 1e-9:
                claimed.append(seg.scene_id)
        offset = end
    return claimed


def cmd_generate_qa(args, settings: Settings) -> int:
    montages_path = settings.get("montages", args.montages)
    targets_path = settings.get("targets", args.targets)
    rep_dir = settings.get("rep", args.rep)
    out_dir = settings.get("out", args.out)
    seed = _require_seed(settings, args)
    if not montages_path or not targets_path or not rep_dir or not out_dir:
        raise UsageError("generate-qa needs --montages, --targets, --rep, and --out")
    if args.print_config:
        return _print_config_and_exit(settings)

    montages = _load_montages(montages_path)
    corpus = load_corpus(rep_dir)
    by_video = _reps_by_video(corpus)
    annotator = _make_annotator(settings.get("annotator", args.annotator, "stub"), settings, args)

    out_montages: list[Montage] = []
    qas: list[NeedleGroundingQA] = []
    for _, target in read_records(targets_path):
        montage = montages.get(target["montage_id"])
        if montage is None:
            raise NotFoundError(f"targets reference unknown montage {target['montage_id']}")
        rep = by_video.get(target["source_video_id"])
        if rep is None:
            raise NotFoundError(f"no representation for video {target['source_video_id']}")
        scene = rep.scene_by_id(target["scene_id"])
        obj = rep.object_by_id(target["object_id"])
        pair_qas = generate_qa(annotator, (scene, obj), montage, seed)
        if pair_qas:
            out_montages.append(register_needles(montage, pair_qas))
            qas.extend(pair_qas)

    _write_outputs(Path(out_dir), out_montages, qas)
    _log(f"generated {len(qas)} QA pair(s) across {len(out_montages)} montage(s)")
    return 0


def cmd_evaluate(args, settings: Settings) -> int:
    qa_path = settings.get("qa", args.qa)
    montages_path = settings.get("montages", args.montages)
    out_path = settings.get("out", args.out)
    model_id = settings.get("model", args.model)
    client_kind = settings.get("client", args.client, "stub-oracle")
    style = PromptStyle(settings.get("style", args.style, PromptStyle.VIDEO_FIRST.value).upper())
    fps = settings.get("fps", args.fps, 1.0, float)
    max_frames = settings.get("max_frames", args.max_frames, None, int)
    batch = settings.get("batch", True if args.batch else None, False, bool)
    if not qa_path or not montages_path or not out_path or not model_id:
        raise UsageError("evaluate needs --qa, --montages, --model, and --out")
    if args.print_config:
        return _print_config_and_exit(settings)

    dataset = _load_dataset(qa_path)
    montages = _load_montages(montages_path)
    phrases = None
    if args.refusal_phrases:
        phrases = tuple(
            line.strip()
            for line in Path(args.refusal_phrases).read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
    if client_kind == "stub-oracle":
        client = OracleModelClient(dataset, style)
    elif client_kind == "stub-empty":
        client = EmptyModelClient()
    elif client_kind == "http":
        endpoint = settings.get("endpoint", args.endpoint)
        if not endpoint:
            raise UsageError("an http client needs --endpoint")
        client = HttpCompletionClient(endpoint=endpoint, model=model_id, token=settings.get("token", args.token, "") or "")
    else:
        raise UsageError(f"unknown client kind {client_kind!r}")

    config = EvalConfig(
        model_id=model_id,
        style=style,
        fps=fps,
        max_frames=max_frames,
        batch=batch,
        refusal_phrases=phrases,
    )
    records = run_evaluation(client, dataset, montages, config)
    write_records(out_path, (r.to_json_dict() for r in records))
    refused = sum(1 for r in records if r.refusal)
    _log(f"evaluated {len(records)} QA pair(s) with {model_id} ({refused} refusal(s))")
    return 0


def _load_predictions(path: str) -> list[PredictionRecord]:
    return [PredictionRecord.from_json_dict(rec) for _, rec in read_records(path)]


def cmd_score(args, settings: Settings) -> int:
    qa_path = settings.get("qa", args.qa)
    pred_path = settings.get("pred", args.pred)
    out_dir = settings.get("out", args.out)
    k = settings.get("k", args.k, 1, int)
    if not qa_path or not pred_path or not out_dir:
        raise UsageError("score needs --qa, --pred, and --out")
    if args.print_config:
        return _print_config_and_exit(settings)

    dataset = _load_dataset(qa_path)
    predictions = {r.qa_id: r for r in _load_predictions(pred_path)}
    montages = _load_montages(args.montages) if args.montages else None

    scores = []
    for qa in dataset:
        record = predictions.get(qa.qa_id)
        if record is None:
            raise NotFoundError(f"predictions are missing qa {qa.qa_id}")
        intervals = record.intervals
        if montages is not None:
            intervals = clip_intervals(intervals, montages[qa.montage_id].total_duration)
        scores.append(score_sample(qa.qa_id, qa.ground_truth, intervals, k=k))

    report = aggregate_report(scores, dataset)
    payload = report.to_json_dict()
    payload["overall"] = {
        "n_questions": len(scores),
        "recall_1x_tiou_0_7": recall_at_kx(scores, k, 0.7),
        "recall_1x_tiou_0_5": recall_at_kx(scores, k, 0.5),
        "average_map": average_map(scores),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "report.txt").write_text(render_report_text(report) + "\n", encoding="utf-8")
    _log(f"scored {len(scores)} QA pair(s); report under {out_dir}")
    return 0


def cmd_report(args, settings: Settings) -> int:
    report_path = settings.get("report", args.report)
    if not report_path:
        raise UsageError("report needs --report pointing at a report.json")
    if args.print_config:
        return _print_config_and_exit(settings)
    payload = json.loads(Path(report_path).read_text(encoding="utf-8"))
    print(render_report_text(payload))
    return 0


def cmd_cost(args, settings: Settings) -> int:
    values = {
        "video_time": settings.get("video_time", args.video_time, None, float),
        "stage1": settings.get("stage1", args.stage1, None, float),
        "stage2": settings.get("stage2", args.stage2, None, float),
        "stage3": settings.get("stage3", args.stage3, None, float),
        "auto_check": settings.get("auto_check", args.auto_check, None, float),
    }
    if args.print_config:
        return _print_config_and_exit(settings)
    missing = [key for key, value in values.items() if value is None]
    if missing:
        flags = ", ".join("--" + key.replace("_", "-") for key in missing)
        raise UsageError(f"cost needs {flags}")
    params = CostParams(
        video_time=values["video_time"],
        stage1_overhead=values["stage1"],
        stage2_overhead=values["stage2"],
        stage3_overhead=values["stage3"],
        auto_check_overhead=values["auto_check"],
    )
    print(json.dumps(cost_summary(params), indent=2, sort_keys=True))
    return 0


def cmd_stats(args, settings: Settings) -> int:
    qa_path = settings.get("qa", args.qa)
    montages_path = settings.get("montages", args.montages)
    if not qa_path or not montages_path:
        raise UsageError("stats needs --qa and --montages")
    if args.print_config:
        return _print_config_and_exit(settings)
    dataset = _load_dataset(qa_path)
    montages = _load_montages(montages_path)
    stats = compute_stats(dataset, montages)
    if args.out:
        Path(args.out).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        _log(f"stats written to {args.out}")
    else:
        print(json.dumps(stats, indent=2, sort_keys=True))
    if args.text:
        print(render_stats_text(stats))
    return 0


def cmd_review_serve(args, settings: Settings) -> int:
    qa_path = settings.get("qa", args.qa)
    montages_path = settings.get("montages", args.montages)
    log_path = settings.get("log", args.log)
    host = settings.get("host", args.host, "127.0.0.1")
    port = settings.get("port", args.port, 8321, int)
    ui_dir = settings.get("ui_dir", args.ui_dir)
    media_dir = settings.get("media_dir", args.media_dir)
    if not qa_path or not montages_path or not log_path:
        raise UsageError("review-serve needs --qa, --montages, and --log")
    if args.print_config:
        return _print_config_and_exit(settings)

    from .review import ReviewStore, create_app

    store = ReviewStore(_load_dataset(qa_path), _load_montages(montages_path), log_path)
    app = create_app(store, ui_dir=ui_dir, media_dir=media_dir)
    import uvicorn

    _log(f"review service on http://{host}:{port} (log: {log_path})")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nemoforge",
        description="Build and score needle-in-a-montage grounding benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="KEY=VALUE settings file")
        p.add_argument("--print-config", action="store_true", help="print resolved settings and exit")

    p = sub.add_parser("ingest", help="validate and normalize a representation corpus")
    common(p)
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_ingest)

    def annotator_flags(p):
        p.add_argument("--annotator", choices=["stub", "http"])
        p.add_argument("--endpoint")
        p.add_argument("--token")
        p.add_argument("--annotator-model")
        p.add_argument("--skip-tags", help="stub: comma-separated categories answered NONE")
        p.add_argument("--reject-tags", help="stub: comma-separated categories failing verification")

    p = sub.add_parser("synthesize", help="compose montages and generate QA")
    common(p)
    p.add_argument("--rep")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--classes", help="comma-separated duration classes (default short)")
    p.add_argument("--per-class", type=int)
    annotator_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("generate-qa", help="run QA generation for composed montages")
    common(p)
    p.add_argument("--montages")
    p.add_argument("--targets")
    p.add_argument("--rep")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    annotator_flags(p)
    p.set_defaults(func=cmd_generate_qa)

    p = sub.add_parser("expand", help="extend montages, split needles, or attach QA")
    common(p)
    p.add_argument("--qa")
    p.add_argument("--montages")
    p.add_argument("--rep")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--extend-to", choices=["medium", "long"])
    p.add_argument("--multi", action="store_true")
    p.add_argument("--attach", action="store_true")
    annotator_flags(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("evaluate", help="collect model predictions for a dataset")
    common(p)
    p.add_argument("--qa")
    p.add_argument("--montages")
    p.add_argument("--model")
    p.add_argument("--client", choices=["stub-oracle", "stub-empty", "http"])
    p.add_argument("--style", choices=[s.value for s in PromptStyle])
    p.add_argument("--fps", type=float)
    p.add_argument("--max-frames", type=int)
    p.add_argument("--batch", action="store_true")
    p.add_argument("--refusal-phrases", help="file with one refusal phrase per line")
    p.add_argument("--endpoint")
    p.add_argument("--token")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("score", help="score predictions against ground truth")
    common(p)
    p.add_argument("--qa", "--gt", dest="qa")
    p.add_argument("--pred")
    p.add_argument("--montages", help="optional; clips intervals to montage bounds")
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="render a report.json as a text table")
    common(p)
    p.add_argument("--report")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("cost", help="annotation time model figures")
    common(p)
    p.add_argument("--video-time", type=float)
    p.add_argument("--stage1", type=float)
    p.add_argument("--stage2", type=float)
    p.add_argument("--stage3", type=float)
    p.add_argument("--auto-check", type=float)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("stats", help="dataset summary statistics")
    common(p)
    p.add_argument("--qa")
    p.add_argument("--montages")
    p.add_argument("--out")
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("review-serve", help="serve the human review API and UI")
    common(p)
    p.add_argument("--qa")
    p.add_argument("--montages")
    p.add_argument("--log")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui-dir")
    p.add_argument("--media-dir")
    p.set_defaults(func=cmd_review_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(getattr(args, "config", None))
        return args.func(args, settings)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except NemoforgeError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
