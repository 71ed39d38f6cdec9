import { describe, expect, it } from "vitest";

import {
  MIN_WINDOW,
  blockHoverText,
  formatTime,
  fullWindow,
  layoutNeedles,
  layoutTimeline,
  panWindow,
  timeAtFraction,
  zoomWindow,
} from "../src/timeline.js";
import { intervals, segment } from "./helpers.js";

describe("layoutTimeline", () => {
  const segments = [
    segment("sc-a", 0, 25),
    segment("sc-b", 25, 50, true),
    segment("sc-c", 50, 100),
  ];

  it("renders 3 segments with 1 needle as 3 blocks, 1 highlighted", () => {
    const blocks = layoutTimeline(segments, fullWindow(100));
    expect(blocks.length).toBe(3);
    expect(blocks.filter((b) => b.isNeedle).length).toBe(1);
    expect(blocks[1]!.sceneId).toBe("sc-b");
  });

  it("widths are proportional and cover the full track", () => {
    const blocks = layoutTimeline(segments, fullWindow(100));
    expect(blocks[0]!.leftPct).toBe(0);
    expect(blocks[0]!.widthPct).toBeCloseTo(25);
    expect(blocks[2]!.widthPct).toBeCloseTo(50);
    const totalWidth = blocks.reduce((acc, b) => acc + b.widthPct, 0);
    expect(totalWidth).toBeCloseTo(100);
  });

  it("clips partially visible segments but keeps true times for hover", () => {
    const blocks = layoutTimeline(segments, { start: 10, end: 30 });
    expect(blocks.length).toBe(2);
    expect(blocks[0]!.leftPct).toBe(0);
    expect(blocks[0]!.widthPct).toBeCloseTo(75); // 10..25 of a 20 s window
    expect(blocks[0]!.montageStart).toBe(0); // unclipped time survives
    expect(blocks[1]!.widthPct).toBeCloseTo(25);
  });

  it("drops segments entirely outside the window", () => {
    const blocks = layoutTimeline(segments, { start: 60, end: 90 });
    expect(blocks.map((b) => b.sceneId)).toEqual(["sc-c"]);
  });
});

describe("layoutNeedles", () => {
  it("renders k markers for k intervals", () => {
    const markers = layoutNeedles(intervals([5, 10], [20, 30], [90, 95]), fullWindow(100));
    expect(markers.length).toBe(3);
    expect(markers[1]!.leftPct).toBeCloseTo(20);
    expect(markers[1]!.widthPct).toBeCloseTo(10);
  });

  it("clips markers to the window", () => {
    const markers = layoutNeedles(intervals([5, 15]), { start: 10, end: 20 });
    expect(markers.length).toBe(1);
    expect(markers[0]!.leftPct).toBe(0);
    expect(markers[0]!.widthPct).toBeCloseTo(50);
  });
});

describe("zoom and pan", () => {
  it("an hour-long montage zooms to a quarter of the track", () => {
    const total = 3600;
    const zoomed = zoomWindow(fullWindow(total), total, 1800, 0.25);
    expect(zoomed.end - zoomed.start).toBeCloseTo(900);
    expect((zoomed.start + zoomed.end) / 2).toBeCloseTo(1800);
  });

  it("never collapses below the minimum window", () => {
    let window = fullWindow(100);
    for (let i = 0; i < 20; i++) {
      window = zoomWindow(window, 100, 50, 0.5);
    }
    expect(window.end - window.start).toBeCloseTo(MIN_WINDOW);
  });

  it("zooming out is clamped to the montage", () => {
    const window = zoomWindow({ start: 40, end: 60 }, 100, 50, 100);
    expect(window).toEqual({ start: 0, end: 100 });
  });

  it("stays inside the montage when centered near an edge", () => {
    const window = zoomWindow(fullWindow(100), 100, 2, 0.1);
    expect(window.start).toBeGreaterThanOrEqual(0);
    expect(window.start).toBeLessThanOrEqual(2);
    expect(window.end).toBeGreaterThanOrEqual(2);
    expect(window.end - window.start).toBeCloseTo(10);
  });

  it("clamps to zero when zooming out near the left edge", () => {
    const window = zoomWindow({ start: 0, end: 10 }, 100, 5, 3);
    expect(window).toEqual({ start: 0, end: 30 });
  });

  it("pans by a fraction of the span and clamps at the ends", () => {
    const window = { start: 10, end: 30 };
    expect(panWindow(window, 100, 0.5)).toEqual({ start: 20, end: 40 });
    expect(panWindow(window, 100, -5)).toEqual({ start: 0, end: 20 });
    expect(panWindow(window, 100, 50)).toEqual({ start: 80, end: 100 });
  });

  it("maps horizontal fractions back to montage seconds", () => {
    expect(timeAtFraction({ start: 10, end: 30 }, 0.25)).toBeCloseTo(15);
  });
});

describe("formatTime", () => {
  it("formats sub-hour times as m:ss.cc", () => {
    expect(formatTime(0)).toBe("0:00.00");
    expect(formatTime(75.25)).toBe("1:15.25");
    expect(formatTime(145.5)).toBe("2:25.50");
  });

  it("adds the hour field for long montages", () => {
    expect(formatTime(3675.5)).toBe("1:01:15.50");
    expect(formatTime(4080)).toBe("1:08:00.00");
  });
});

describe("blockHoverText", () => {
  it("names the scene, the montage interval, and the source video", () => {
    const block = layoutTimeline([segment("sc-b", 25, 50, true)], fullWindow(100))[0]!;
    const text = blockHoverText(block);
    expect(text).toContain("sc-b");
    expect(text).toContain("0:25.00");
    expect(text).toContain("0:50.00");
    expect(text).toContain("vid-x");
  });
});
