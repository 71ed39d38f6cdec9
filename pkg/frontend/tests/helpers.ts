/** Shared test fixtures: hand-built items matching the API payload shape. */

import type { ReviewItem, SegmentView, TimeInterval } from "../src/types.js";

export function segment(
  sceneId: string,
  start: number,
  end: number,
  isNeedle = false,
): SegmentView {
  return {
    scene_id: sceneId,
    source_video_id: "vid-x",
    montage_start: start,
    montage_end: end,
    is_needle: isNeedle,
  };
}

export function singleItem(overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    qa: {
      qa_id: "qa-1",
      montage_id: "mtg-1",
      needle_type: "OBJECT",
      question: "When does the red prop appear?",
      ground_truth: [{ start: 10, end: 20 }],
      duration_class: "SHORT",
      needle_count_class: "SINGLE",
      target_object_tag: "red prop",
      provenance: "GENERATED",
      parent_qa_id: null,
    },
    montage_id: "mtg-1",
    total_duration: 100,
    segments: [
      segment("sc-a", 0, 10),
      segment("sc-b", 10, 20, true),
      segment("sc-c", 20, 100),
    ],
    status: "pending",
    verdict: null,
    ...overrides,
  };
}

export function multiItem(): ReviewItem {
  const base = singleItem();
  return {
    ...base,
    qa: {
      ...base.qa,
      qa_id: "qa-2",
      needle_count_class: "MULTI",
      ground_truth: [
        { start: 10, end: 20 },
        { start: 40, end: 50 },
      ],
    },
  };
}

export function intervals(...pairs: [number, number][]): TimeInterval[] {
  return pairs.map(([start, end]) => ({ start, end }));
}
