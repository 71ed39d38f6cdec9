/**
 * Pure layout math for the montage timeline.
 *
 * Everything here maps montage seconds to percentages of the visible window
 * so the DOM layer just sets left/width styles. No DOM access: the same
 * functions back the unit tests and the browser rendering.
 */

import type { SegmentView, TimeInterval } from "./types.js";

/** The visible slice of the montage, in seconds. */
export interface ViewWindow {
  start: number;
  end: number;
}

/** One rendered block: a segment clipped to the window, with hover payload. */
export interface TimelineBlock {
  sceneId: string;
  sourceVideoId: string;
  /** Unclipped montage times, for the hover label. */
  montageStart: number;
  montageEnd: number;
  isNeedle: boolean;
  /** Position within the window, percent of window width. */
  leftPct: number;
  widthPct: number;
}

/** One rendered ground-truth marker, clipped to the window. */
export interface NeedleMarker {
  interval: TimeInterval;
  leftPct: number;
  widthPct: number;
}

/** Smallest zoom window, seconds. Keeps percentages finite and draggable. */
export const MIN_WINDOW = 1.0;

export function fullWindow(totalDuration: number): ViewWindow {
  return { start: 0, end: totalDuration };
}

function pct(seconds: number, window: ViewWindow): number {
  return ((seconds - window.start) / (window.end - window.start)) * 100;
}

/**
 * Lay the montage segments out in the window. Segments entirely outside the
 * window are dropped; partially visible ones are clipped but report their
 * true montage times for the hover label.
 */
export function layoutTimeline(segments: SegmentView[], window: ViewWindow): TimelineBlock[] {
  const blocks: TimelineBlock[] = [];
  for (const seg of segments) {
    const visibleStart = Math.max(seg.montage_start, window.start);
    const visibleEnd = Math.min(seg.montage_end, window.end);
    if (visibleEnd <= visibleStart) continue;
    blocks.push({
      sceneId: seg.scene_id,
      sourceVideoId: seg.source_video_id,
      montageStart: seg.montage_start,
      montageEnd: seg.montage_end,
      isNeedle: seg.is_needle,
      leftPct: pct(visibleStart, window),
      widthPct: pct(visibleEnd, window) - pct(visibleStart, window),
    });
  }
  return blocks;
}

/** Position ground-truth (or draft) intervals as overlay markers. */
export function layoutNeedles(intervals: TimeInterval[], window: ViewWindow): NeedleMarker[] {
  const markers: NeedleMarker[] = [];
  for (const interval of intervals) {
    const visibleStart = Math.max(interval.start, window.start);
    const visibleEnd = Math.min(interval.end, window.end);
    if (visibleEnd <= visibleStart) continue;
    markers.push({
      interval,
      leftPct: pct(visibleStart, window),
      widthPct: pct(visibleEnd, window) - pct(visibleStart, window),
    });
  }
  return markers;
}

/**
 * Zoom by a factor around a center time. factor < 1 zooms in, > 1 out. The
 * result is clamped to [0, totalDuration] and never collapses below
 * MIN_WINDOW, so repeated zoom-in stays usable on hour-long montages.
 */
export function zoomWindow(
  window: ViewWindow,
  totalDuration: number,
  center: number,
  factor: number,
): ViewWindow {
  const span = Math.min(
    totalDuration,
    Math.max(MIN_WINDOW, (window.end - window.start) * factor),
  );
  let start = center - ((center - window.start) / (window.end - window.start)) * span;
  start = Math.max(0, Math.min(start, totalDuration - span));
  return { start, end: start + span };
}

/** Shift the window by a fraction of its span, clamped to the montage. */
export function panWindow(
  window: ViewWindow,
  totalDuration: number,
  fraction: number,
): ViewWindow {
  const span = window.end - window.start;
  let start = window.start + span * fraction;
  start = Math.max(0, Math.min(start, totalDuration - span));
  return { start, end: start + span };
}

/** Montage seconds at a horizontal fraction (0..1) of the window. */
export function timeAtFraction(window: ViewWindow, fraction: number): number {
  return window.start + (window.end - window.start) * fraction;
}

/**
 * Seconds as a compact clock string: "m:ss.cc", with hours once the montage
 * runs that long. Times land on a centisecond grid, so two decimals is exact.
 */
export function formatTime(seconds: number): string {
  const sign = seconds < 0 ? "-" : "";
  const total = Math.abs(seconds);
  const hours = Math.floor(total / 3600);
  const minutes = Math.floor((total % 3600) / 60);
  const secs = total % 60;
  const secText = secs.toFixed(2).padStart(5, "0");
  if (hours > 0) {
    return `${sign}${hours}:${String(minutes).padStart(2, "0")}:${secText}`;
  }
  return `${sign}${minutes}:${secText}`;
}

/** Hover label for a block: scene, montage interval, and source video. */
export function blockHoverText(block: TimelineBlock): string {
  return (
    `${block.sceneId} · ${formatTime(block.montageStart)}–${formatTime(block.montageEnd)}` +
    ` · from ${block.sourceVideoId}`
  );
}
