/**
 * Wire types for the review service JSON API.
 *
 * These mirror api-schema.md field for field. Keep them dumb: no methods,
 * no client-only fields, so a parsed response body is directly assignable.
 */

export type NeedleType = "OBJECT" | "SCENE";
export type DurationClass = "SHORT" | "MEDIUM" | "LONG";
export type NeedleCountClass = "SINGLE" | "MULTI";
export type Provenance = "GENERATED" | "EXPANDED" | "CLEANED";
export type VerdictAction = "ACCEPT" | "REFINE" | "REJECT";

/** Half-open is not a thing here: start < end, both in montage seconds. */
export interface TimeInterval {
  start: number;
  end: number;
}

/** One question with its ground-truth intervals on the montage timeline. */
export interface QaRecord {
  qa_id: string;
  montage_id: string;
  needle_type: NeedleType;
  question: string;
  ground_truth: TimeInterval[];
  duration_class: DurationClass;
  needle_count_class: NeedleCountClass;
  target_object_tag: string | null;
  provenance: Provenance;
  parent_qa_id: string | null;
}

/** A montage segment positioned on the montage timeline. */
export interface SegmentView {
  scene_id: string;
  source_video_id: string;
  montage_start: number;
  montage_end: number;
  /** True when this segment overlaps a ground-truth interval of the QA. */
  is_needle: boolean;
}

/** A stored verdict as the server echoes it back. */
export interface StoredVerdict {
  qa_id: string;
  action: VerdictAction;
  reviewer_id: string;
  timestamp: number;
  refined_question: string | null;
  refined_intervals: TimeInterval[] | null;
}

/** Review status: pending until a verdict lands, then that verdict's action. */
export type ItemStatus = "pending" | VerdictAction;

/** One review queue item: the QA plus its montage timeline and review state. */
export interface ReviewItem {
  qa: QaRecord;
  montage_id: string;
  total_duration: number;
  segments: SegmentView[];
  status: ItemStatus;
  verdict: StoredVerdict | null;
}

/** GET /api/v1/items response. */
export interface ItemPage {
  total: number;
  page: number;
  page_size: number;
  items: ReviewItem[];
}

/** POST /api/v1/verdicts request body. */
export interface VerdictRequest {
  qa_id: string;
  action: VerdictAction;
  refined_question?: string | null;
  refined_intervals?: TimeInterval[] | null;
}

/** POST /api/v1/verdicts response. */
export interface VerdictResponse {
  stored: StoredVerdict;
  status: ItemStatus;
}

/** POST /api/v1/export response. */
export interface ExportResponse {
  items: QaRecord[];
  metadata: {
    exported: number;
    verdict_counts: Record<string, number>;
    superseded_qa_ids: string[];
  };
}

/** Query filters accepted by GET /api/v1/items. */
export interface ItemFilter {
  status?: ItemStatus;
  duration_class?: DurationClass;
  needle_type?: NeedleType;
  page?: number;
  page_size?: number;
}
