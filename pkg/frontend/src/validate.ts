/**
 * Client-side verdict validation.
 *
 * This mirrors a subset of the server's rules so obvious mistakes get an
 * inline message instead of a round trip. The server re-checks everything;
 * nothing here may be looser than the server, and the server stays the gate.
 */

import type { ReviewItem, TimeInterval, VerdictAction, VerdictRequest } from "./types.js";

/** Edit state the form holds for the selected item. */
export interface VerdictDraft {
  action: VerdictAction;
  /** Current question text in the editor (may equal the original). */
  question: string;
  /** Current interval handles in the editor (may equal the ground truth). */
  intervals: TimeInterval[];
}

const EPSILON = 1e-9;

function sameIntervals(a: TimeInterval[], b: TimeInterval[]): boolean {
  if (a.length !== b.length) return false;
  return a.every(
    (iv, i) =>
      Math.abs(iv.start - b[i]!.start) < EPSILON && Math.abs(iv.end - b[i]!.end) < EPSILON,
  );
}

/** Problems with an interval list against a montage of the given duration. */
export function intervalProblems(intervals: TimeInterval[], totalDuration: number): string[] {
  const problems: string[] = [];
  if (intervals.length === 0) {
    problems.push("at least one interval is required");
    return problems;
  }
  intervals.forEach((iv, i) => {
    const label = `interval ${i + 1}`;
    if (!Number.isFinite(iv.start) || !Number.isFinite(iv.end)) {
      problems.push(`${label}: start and end must be numbers`);
      return;
    }
    if (iv.start >= iv.end) {
      problems.push(`${label}: start ${iv.start} must be before end ${iv.end}`);
    }
    if (iv.start < 0 || iv.end > totalDuration + EPSILON) {
      problems.push(`${label}: must stay inside [0, ${totalDuration}]`);
    }
  });
  for (let i = 1; i < intervals.length; i++) {
    if (intervals[i]!.start < intervals[i - 1]!.end - EPSILON) {
      problems.push(`interval ${i + 1} overlaps interval ${i}; keep them sorted and disjoint`);
    }
  }
  return problems;
}

/**
 * Turn the form state into the request body, dropping fields the reviewer did
 * not actually change. ACCEPT and REJECT never carry refinements, so their
 * edits are discarded on purpose.
 */
export function buildVerdict(item: ReviewItem, draft: VerdictDraft): VerdictRequest {
  const request: VerdictRequest = { qa_id: item.qa.qa_id, action: draft.action };
  if (draft.action !== "REFINE") return request;

  const question = draft.question.trim();
  if (question !== item.qa.question) {
    request.refined_question = question;
  }
  if (!sameIntervals(draft.intervals, item.qa.ground_truth)) {
    request.refined_intervals = draft.intervals.map((iv) => ({ start: iv.start, end: iv.end }));
  }
  return request;
}

/**
 * Validate a request before submitting. Returns human-readable problems;
 * empty means the client found nothing wrong (the server may still object).
 */
export function validateVerdict(item: ReviewItem, request: VerdictRequest): string[] {
  const problems: string[] = [];

  if (request.action === "REFINE") {
    if (request.refined_question == null && request.refined_intervals == null) {
      problems.push("REFINE needs a change: edit the question or the intervals first");
    }
    if (request.refined_question != null && request.refined_question.trim() === "") {
      problems.push("the refined question is empty");
    }
    if (request.refined_intervals != null) {
      problems.push(...intervalProblems(request.refined_intervals, item.total_duration));
      if (item.qa.needle_count_class === "MULTI" && request.refined_intervals.length < 2) {
        problems.push("this is a MULTI question; keep at least 2 intervals");
      }
    }
  } else if (request.refined_question != null || request.refined_intervals != null) {
    problems.push(`${request.action} must not carry refinements`);
  }

  return problems;
}
