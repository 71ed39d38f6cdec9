/**
 * Pure presentation helpers for the queue pane.
 *
 * The server filters by status, duration class, and needle type; needle count
 * is not a server-side filter, so the MULTI/SINGLE toggle narrows the fetched
 * page client-side. That only hides rows, it never reorders or invents them.
 */

import type { NeedleCountClass, QaRecord, ReviewItem } from "./types.js";

export type CountFilter = "" | NeedleCountClass;

/** Rows to show for the current count toggle ("" = all). */
export function filterByCount(items: ReviewItem[], count: CountFilter): ReviewItem[] {
  if (!count) return items;
  return items.filter((item) => item.qa.needle_count_class === count);
}

/** Badge labels for a QA row: duration class, needle type, MULTI when set. */
export function rowBadges(qa: QaRecord): string[] {
  const badges: string[] = [qa.duration_class, qa.needle_type];
  if (qa.needle_count_class === "MULTI") badges.push("MULTI");
  return badges;
}
