"""Human review service: verdict log, clean export, HTTP JSON API.

Verdicts are event-sourced into an append-only JSONL log; the latest
verdict per qa_id wins. Replaying the log from scratch reproduces the
same export, so a service restart loses nothing.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from pydantic import BaseModel

from .core import (
    Montage,
    NeedleCountClass,
    NeedleGroundingQA,
    Provenance,
    TimeInterval,
    check_sorted_disjoint,
    needle_count_class_for,
)
from .errors import NotFoundError, RecordValidationError
from .jsonl import append_record, read_records


# Request bodies live at module level so FastAPI can resolve the
# postponed annotations on the endpoint signatures.
class IntervalIn(BaseModel):
    start: float
    end: float


class VerdictIn(BaseModel):
    qa_id: str
    action: str
    refined_question: str | None = None
    refined_intervals: list[IntervalIn] | None = None


class VerdictAction(str, Enum):
    ACCEPT = "ACCEPT"
    REFINE = "REFINE"
    REJECT = "REJECT"


@dataclass(frozen=True)
class ReviewVerdict:
    """One reviewer decision about one QA item."""

    qa_id: str
    action: VerdictAction
    reviewer_id: str
    timestamp: float
    refined_question: str | None = None
    refined_intervals: tuple[TimeInterval, ...] | None = None

    def __post_init__(self):
        if not self.qa_id:
            raise RecordValidationError("verdict qa_id must be non-empty")
        if not self.reviewer_id:
            raise RecordValidationError("verdict reviewer_id must be non-empty")
        if self.refined_intervals is not None:
            object.__setattr__(self, "refined_intervals", tuple(self.refined_intervals))
        if self.action == VerdictAction.REFINE:
            if self.refined_question is None and self.refined_intervals is None:
                raise RecordValidationError(
                    f"REFINE verdict for {self.qa_id} must change the question or the intervals"
                )
            if self.refined_question is not None and not self.refined_question.strip():
                raise RecordValidationError(f"refined question for {self.qa_id} is empty")
            if self.refined_intervals is not None:
                if not self.refined_intervals:
                    raise RecordValidationError(f"refined intervals for {self.qa_id} are empty")
                check_sorted_disjoint(self.refined_intervals, f"refined intervals for {self.qa_id}")
        elif self.refined_question is not None or self.refined_intervals is not None:
            raise RecordValidationError(
                f"{self.action.value} verdict for {self.qa_id} must not carry refinements"
            )

    def to_json_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "action": self.action.value,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
            "refined_question": self.refined_question,
            "refined_intervals": (
                None
                if self.refined_intervals is None
                else [iv.to_json_dict() for iv in self.refined_intervals]
            ),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "ReviewVerdict":
        try:
            intervals = data.get("refined_intervals")
            return cls(
                qa_id=data["qa_id"],
                action=VerdictAction(data["action"]),
                reviewer_id=data["reviewer_id"],
                timestamp=data["timestamp"],
                refined_question=data.get("refined_question"),
                refined_intervals=(
                    None if intervals is None else tuple(TimeInterval.from_json_dict(iv) for iv in intervals)
                ),
            )
        except KeyError as exc:
            raise RecordValidationError(f"verdict record missing field {exc}") from exc
        except ValueError as exc:
            raise RecordValidationError(f"verdict record has invalid value: {exc}") from exc


def _validate_against_item(verdict: ReviewVerdict, qa: NeedleGroundingQA, montage: Montage) -> None:
    """Reject refinements that break the item's montage or class invariants."""
    if verdict.refined_intervals is None:
        return
    for iv in verdict.refined_intervals:
        if iv.start < 0 or iv.end > montage.total_duration:
            raise RecordValidationError(
                f"refined interval [{iv.start}, {iv.end}] escapes montage "
                f"[0, {montage.total_duration}]"
            )
    if (
        qa.needle_count_class == NeedleCountClass.MULTI
        and len(verdict.refined_intervals) < 2
    ):
        raise RecordValidationError(
            f"qa {qa.qa_id} is MULTI; a refinement cannot reduce it below 2 intervals"
        )


def apply_verdict(qa: NeedleGroundingQA, verdict: ReviewVerdict) -> NeedleGroundingQA:
    """The cleaned QA an ACCEPT or REFINE verdict produces."""
    question = qa.question
    ground_truth = qa.ground_truth
    if verdict.action == VerdictAction.REFINE:
        if verdict.refined_question is not None:
            question = verdict.refined_question
        if verdict.refined_intervals is not None:
            ground_truth = verdict.refined_intervals
    return NeedleGroundingQA(
        qa_id=qa.qa_id,
        montage_id=qa.montage_id,
        needle_type=qa.needle_type,
        question=question,
        ground_truth=ground_truth,
        duration_class=qa.duration_class,
        needle_count_class=needle_count_class_for(ground_truth),
        target_object_tag=qa.target_object_tag,
        provenance=Provenance.CLEANED,
        parent_qa_id=qa.parent_qa_id,
    )


def export_clean(
    dataset: Sequence[NeedleGroundingQA],
    verdicts: Sequence[ReviewVerdict],
) -> tuple[list[NeedleGroundingQA], dict]:
    """Cleaned dataset from a verdict history.

    The last verdict per qa_id wins. ACCEPT and REFINE items are exported
    with provenance CLEANED (refinements applied); REJECT and unreviewed
    items are dropped. Returns (items ordered by qa_id, summary metadata).
    """
    latest: dict[str, ReviewVerdict] = {}
    conflict_ids: set[str] = set()
    for verdict in verdicts:
        if verdict.qa_id in latest:
            conflict_ids.add(verdict.qa_id)
        latest[verdict.qa_id] = verdict
    items = []
    counts = {"ACCEPT": 0, "REFINE": 0, "REJECT": 0, "unreviewed": 0}
    for qa in sorted(dataset, key=lambda qa: qa.qa_id):
        verdict = latest.get(qa.qa_id)
        if verdict is None:
            counts["unreviewed"] += 1
            continue
        counts[verdict.action.value] += 1
        if verdict.action == VerdictAction.REJECT:
            continue
        items.append(apply_verdict(qa, verdict))
    metadata = {
        "exported": len(items),
        "verdict_counts": counts,
        "superseded_qa_ids": sorted(conflict_ids),
    }
    return items, metadata


class ReviewStore:
    """Dataset plus durable verdict log behind the review API."""

    def __init__(
        self,
        dataset: Sequence[NeedleGroundingQA],
        montages: Mapping[str, Montage],
        log_path: str | os.PathLike,
    ):
        self.dataset = sorted(dataset, key=lambda qa: qa.qa_id)
        self.qa_by_id = {qa.qa_id: qa for qa in self.dataset}
        self.montages = dict(montages)
        for qa in self.dataset:
            if qa.montage_id not in self.montages:
                raise NotFoundError(f"qa {qa.qa_id} references unknown montage {qa.montage_id}")
        self.log_path = Path(log_path)
        self.verdicts: list[ReviewVerdict] = []
        self.latest: dict[str, ReviewVerdict] = {}
        self._replay()

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        for _, record in read_records(self.log_path):
            verdict = ReviewVerdict.from_json_dict(record)
            self.verdicts.append(verdict)
            self.latest[verdict.qa_id] = verdict

    def montage_for(self, qa: NeedleGroundingQA) -> Montage:
        return self.montages[qa.montage_id]

    def submit(self, verdict: ReviewVerdict) -> ReviewVerdict:
        """Validate, durably append, and apply one verdict."""
        qa = self.qa_by_id.get(verdict.qa_id)
        if qa is None:
            raise NotFoundError(f"no QA item {verdict.qa_id}")
        _validate_against_item(verdict, qa, self.montage_for(qa))
        append_record(self.log_path, verdict.to_json_dict(), fsync=True)
        self.verdicts.append(verdict)
        self.latest[verdict.qa_id] = verdict
        return verdict

    def status_of(self, qa_id: str) -> str:
        verdict = self.latest.get(qa_id)
        return "pending" if verdict is None else verdict.action.value

    def item_payload(self, qa: NeedleGroundingQA) -> dict:
        montage = self.montage_for(qa)
        verdict = self.latest.get(qa.qa_id)
        segments = []
        offset = 0.0
        for seg in montage.segments:
            end = offset + seg.length
            segments.append(
                {
                    "scene_id": seg.scene_id,
                    "source_video_id": seg.source_video_id,
                    "montage_start": offset,
                    "montage_end": end,
                    "is_needle": any(
                        iv.start < end and offset < iv.end for iv in qa.ground_truth
                    ),
                }
            )
            offset = end
        return {
            "qa": qa.to_json_dict(),
            "montage_id": montage.montage_id,
            "total_duration": montage.total_duration,
            "segments": segments,
            "status": self.status_of(qa.qa_id),
            "verdict": None if verdict is None else verdict.to_json_dict(),
        }

    def list_items(
        self,
        status: str | None = None,
        duration_class: str | None = None,
        needle_type: str | None = None,
        page: int = 1,
        page_size: int = 50,
    ) -> dict:
        if page < 1 or page_size < 1:
            raise RecordValidationError("page and page_size must be >= 1")
        items = self.dataset
        if duration_class:
            items = [qa for qa in items if qa.duration_class.value == duration_class.upper()]
        if needle_type:
            items = [qa for qa in items if qa.needle_type.value == needle_type.upper()]
        if status:
            wanted = status if status == "pending" else status.upper()
            items = [qa for qa in items if self.status_of(qa.qa_id) == wanted]
        total = len(items)
        start = (page - 1) * page_size
        rows = [self.item_payload(qa) for qa in items[start : start + page_size]]
        return {"total": total, "page": page, "page_size": page_size, "items": rows}

    def export(self) -> tuple[list[NeedleGroundingQA], dict]:
        return export_clean(self.dataset, self.verdicts)


def create_app(store: ReviewStore, ui_dir: str | None = None, media_dir: str | None = None):
    """FastAPI app exposing the review API, static UI, and montage media."""
    from fastapi import FastAPI, Header, HTTPException
    from fastapi.responses import FileResponse, JSONResponse

    app = FastAPI(title="nemoforge review service")

    @app.get("/api/v1/items")
    def list_items(
        status: str | None = None,
        duration_class: str | None = None,
        needle_type: str | None = None,
        page: int = 1,
        page_size: int = 50,
    ):
        try:
            return store.list_items(status, duration_class, needle_type, page, page_size)
        except RecordValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/api/v1/items/{qa_id}")
    def get_item(qa_id: str):
        qa = store.qa_by_id.get(qa_id)
        if qa is None:
            raise HTTPException(status_code=404, detail=f"no QA item {qa_id}")
        return store.item_payload(qa)

    @app.post("/api/v1/verdicts")
    def post_verdict(body: VerdictIn, x_reviewer_id: str = Header(default="anonymous")):
        try:
            verdict = ReviewVerdict(
                qa_id=body.qa_id,
                action=VerdictAction(body.action),
                reviewer_id=x_reviewer_id,
                timestamp=time.time(),
                refined_question=body.refined_question,
                refined_intervals=(
                    None
                    if body.refined_intervals is None
                    else tuple(TimeInterval(iv.start, iv.end) for iv in body.refined_intervals)
                ),
            )
            stored = store.submit(verdict)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except RecordValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"stored": stored.to_json_dict(), "status": store.status_of(body.qa_id)}

    @app.post("/api/v1/export")
    def post_export():
        items, metadata = store.export()
        return {"items": [qa.to_json_dict() for qa in items], "metadata": metadata}

    if media_dir:
        @app.get("/media/{montage_id}")
        def get_media(montage_id: str):
            path = Path(media_dir) / f"{montage_id}.mp4"
            if not path.exists():
                raise HTTPException(status_code=404, detail=f"no media for montage {montage_id}")
            return FileResponse(path, media_type="video/mp4")
    else:
        @app.get("/media/{montage_id}")
        def get_media_missing(montage_id: str):
            raise HTTPException(status_code=404, detail="no media directory configured")

    if ui_dir:
        ui_root = Path(ui_dir)

        @app.get("/")
        def index():
            index_path = ui_root / "index.html"
            if not index_path.exists():
                return JSONResponse({"detail": "UI bundle not built"}, status_code=404)
            return FileResponse(index_path, media_type="text/html")

        @app.get("/ui/{asset_path:path}")
        def ui_asset(asset_path: str):
            target = (ui_root / asset_path).resolve()
            if not str(target).startswith(str(ui_root.resolve())) or not target.is_file():
                raise HTTPException(status_code=404, detail=f"no UI asset {asset_path}")
            media_type = "text/html"
            if target.suffix == ".js":
                media_type = "text/javascript"
            elif target.suffix == ".css":
                media_type = "text/css"
            elif target.suffix == ".map" or target.suffix == ".json":
                media_type = "application/json"
            return FileResponse(target, media_type=media_type)
    else:
        @app.get("/")
        def index_missing():
            return JSONResponse(
                {"detail": "review UI not configured; API lives under /api/v1"}, status_code=200
            )

    return app
