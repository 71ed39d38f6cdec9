/**
 * DOM wiring for the review UI.
 *
 * All state that matters lives on the server; this module keeps only the
 * current page, the selected item, and the reviewer's in-progress edits.
 * After every successful submit the item is re-fetched so the screen shows
 * exactly what the server stored.
 */

import { ApiError, ReviewApi } from "./api.js";
import {
  blockHoverText,
  formatTime,
  fullWindow,
  layoutNeedles,
  layoutTimeline,
  panWindow,
  timeAtFraction,
  zoomWindow,
  type ViewWindow,
} from "./timeline.js";
import { filterByCount, rowBadges, type CountFilter } from "./queue.js";
import type {
  DurationClass,
  ItemFilter,
  ItemStatus,
  NeedleType,
  ReviewItem,
  TimeInterval,
  VerdictAction,
} from "./types.js";
import { buildVerdict, validateVerdict } from "./validate.js";

const PAGE_SIZE = 25;

const api = new ReviewApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const ui = {
  reviewerId: el<HTMLInputElement>("reviewer-id"),
  banner: el<HTMLDivElement>("error-banner"),
  bannerText: el<HTMLSpanElement>("error-text"),
  retryBtn: el<HTMLButtonElement>("retry-btn"),
  filterStatus: el<HTMLSelectElement>("filter-status"),
  filterDuration: el<HTMLSelectElement>("filter-duration"),
  filterType: el<HTMLSelectElement>("filter-type"),
  filterCount: el<HTMLSelectElement>("filter-count"),
  queueList: el<HTMLUListElement>("queue-list"),
  pagePrev: el<HTMLButtonElement>("page-prev"),
  pageNext: el<HTMLButtonElement>("page-next"),
  pageInfo: el<HTMLSpanElement>("page-info"),
  detailEmpty: el<HTMLParagraphElement>("detail-empty"),
  detailBody: el<HTMLDivElement>("detail-body"),
  qaId: el<HTMLSpanElement>("detail-qa-id"),
  badges: el<HTMLSpanElement>("detail-badges"),
  status: el<HTMLSpanElement>("detail-status"),
  player: el<HTMLVideoElement>("player"),
  noMedia: el<HTMLParagraphElement>("no-media"),
  timeline: el<HTMLDivElement>("timeline"),
  needleLayer: el<HTMLDivElement>("needle-layer"),
  zoomIn: el<HTMLButtonElement>("zoom-in"),
  zoomOut: el<HTMLButtonElement>("zoom-out"),
  zoomReset: el<HTMLButtonElement>("zoom-reset"),
  panLeft: el<HTMLButtonElement>("pan-left"),
  panRight: el<HTMLButtonElement>("pan-right"),
  windowInfo: el<HTMLSpanElement>("window-info"),
  hoverInfo: el<HTMLDivElement>("hover-info"),
  question: el<HTMLTextAreaElement>("question-edit"),
  intervalRows: el<HTMLDivElement>("interval-rows"),
  intervalAdd: el<HTMLButtonElement>("interval-add"),
  problems: el<HTMLDivElement>("validation-msgs"),
  accept: el<HTMLButtonElement>("btn-accept"),
  refine: el<HTMLButtonElement>("btn-refine"),
  reject: el<HTMLButtonElement>("btn-reject"),
};

const state = {
  page: 1,
  total: 0,
  items: [] as ReviewItem[],
  selected: null as ReviewItem | null,
  /** The reviewer's working copy of the intervals for the selected item. */
  draftIntervals: [] as TimeInterval[],
  window: { start: 0, end: 1 } as ViewWindow,
};

function currentFilter(): ItemFilter {
  const filter: ItemFilter = { page: state.page, page_size: PAGE_SIZE };
  if (ui.filterStatus.value) filter.status = ui.filterStatus.value as ItemStatus;
  if (ui.filterDuration.value) filter.duration_class = ui.filterDuration.value as DurationClass;
  if (ui.filterType.value) filter.needle_type = ui.filterType.value as NeedleType;
  return filter;
}

function showBanner(message: string): void {
  ui.bannerText.textContent = message;
  ui.banner.classList.remove("hidden");
}

function hideBanner(): void {
  ui.banner.classList.add("hidden");
}

function badge(text: string): HTMLSpanElement {
  const span = document.createElement("span");
  span.className = `badge ${text}`;
  span.textContent = text;
  return span;
}

// ---------------------------------------------------------------- queue pane

async function refreshQueue(): Promise<void> {
  let page;
  try {
    page = await api.listItems(currentFilter());
  } catch (err) {
    // Keep whatever is on screen; the reviewer loses nothing.
    showBanner(err instanceof ApiError ? err.detail : `service unreachable: ${err}`);
    return;
  }
  hideBanner();
  state.items = page.items;
  state.total = page.total;
  renderQueue();
}

function renderQueue(): void {
  ui.queueList.replaceChildren();
  const visible = filterByCount(state.items, ui.filterCount.value as CountFilter);
  for (const item of visible) {
    const li = document.createElement("li");
    li.dataset.qaId = item.qa.qa_id;
    if (state.selected?.qa.qa_id === item.qa.qa_id) li.classList.add("selected");
    li.append(...rowBadges(item.qa).map(badge));
    const q = document.createElement("span");
    q.className = "row-q";
    q.textContent = item.qa.question;
    li.append(q);
    li.addEventListener("click", () => void selectItem(item.qa.qa_id));
    ui.queueList.append(li);
  }
  const pages = Math.max(1, Math.ceil(state.total / PAGE_SIZE));
  ui.pageInfo.textContent = `${state.page} / ${pages} (${state.total})`;
  ui.pagePrev.disabled = state.page <= 1;
  ui.pageNext.disabled = state.page >= pages;
}

// --------------------------------------------------------------- detail pane

async function selectItem(qaId: string): Promise<void> {
  let item;
  try {
    item = await api.getItem(qaId);
  } catch (err) {
    showBanner(err instanceof ApiError ? err.detail : `service unreachable: ${err}`);
    return;
  }
  hideBanner();
  loadItem(item);
}

/** Reset the detail pane from a server payload (select or post-submit). */
function loadItem(item: ReviewItem): void {
  state.selected = item;
  state.window = fullWindow(item.total_duration);
  const effective = item.verdict?.refined_intervals ?? item.qa.ground_truth;
  state.draftIntervals = effective.map((iv) => ({ ...iv }));
  ui.question.value = item.verdict?.refined_question ?? item.qa.question;
  ui.problems.textContent = "";
  renderDetail();
  renderQueue();
  void probeMedia(item.montage_id);
}

function renderDetail(): void {
  const item = state.selected;
  if (!item) {
    ui.detailBody.classList.add("hidden");
    ui.detailEmpty.classList.remove("hidden");
    return;
  }
  ui.detailEmpty.classList.add("hidden");
  ui.detailBody.classList.remove("hidden");
  ui.qaId.textContent = item.qa.qa_id;
  ui.badges.replaceChildren(...rowBadges(item.qa).map(badge));
  ui.status.textContent = item.status;
  renderTimeline();
  renderIntervalRows();
}

async function probeMedia(montageId: string): Promise<void> {
  const ok = await api.hasMedia(montageId);
  if (state.selected?.montage_id !== montageId) return; // stale probe
  if (ok) {
    ui.player.src = api.mediaUrl(montageId);
    ui.player.classList.remove("hidden");
    ui.noMedia.classList.add("hidden");
  } else {
    ui.player.removeAttribute("src");
    ui.player.classList.add("hidden");
    ui.noMedia.classList.remove("hidden");
  }
}

// ------------------------------------------------------------------ timeline

function renderTimeline(): void {
  const item = state.selected;
  if (!item) return;
  ui.timeline.replaceChildren();
  for (const block of layoutTimeline(item.segments, state.window)) {
    const div = document.createElement("div");
    div.className = block.isNeedle ? "block needle" : "block";
    div.style.left = `${block.leftPct}%`;
    div.style.width = `${block.widthPct}%`;
    div.title = blockHoverText(block);
    div.addEventListener("mouseenter", () => {
      ui.hoverInfo.textContent = blockHoverText(block);
    });
    ui.timeline.append(div);
  }
  ui.needleLayer.replaceChildren();
  layoutNeedles(state.draftIntervals, state.window).forEach((marker) => {
    const index = state.draftIntervals.indexOf(marker.interval);
    const div = document.createElement("div");
    div.className = "marker";
    div.style.left = `${marker.leftPct}%`;
    div.style.width = `${marker.widthPct}%`;
    div.title = `${formatTime(marker.interval.start)}–${formatTime(marker.interval.end)}`;
    for (const side of ["left", "right"] as const) {
      const grip = document.createElement("div");
      grip.className = `grip ${side}`;
      grip.addEventListener("pointerdown", (ev) => startDrag(ev, index, side));
      div.append(grip);
    }
    ui.needleLayer.append(div);
  });
  ui.windowInfo.textContent =
    `${formatTime(state.window.start)} – ${formatTime(state.window.end)}` +
    ` of ${formatTime(item.total_duration)}`;
}

/** Drag a marker edge: pixels → montage seconds via the visible window. */
function startDrag(ev: PointerEvent, index: number, side: "left" | "right"): void {
  ev.preventDefault();
  const rect = ui.timeline.getBoundingClientRect();
  const move = (moveEv: PointerEvent) => {
    const fraction = Math.min(1, Math.max(0, (moveEv.clientX - rect.left) / rect.width));
    const time = Math.round(timeAtFraction(state.window, fraction) * 100) / 100;
    const iv = state.draftIntervals[index];
    if (!iv) return;
    if (side === "left" && time < iv.end) iv.start = Math.max(0, time);
    if (side === "right" && time > iv.start) {
      iv.end = Math.min(state.selected?.total_duration ?? time, time);
    }
    renderTimeline();
    renderIntervalRows();
  };
  const up = () => {
    window.removeEventListener("pointermove", move);
    window.removeEventListener("pointerup", up);
  };
  window.addEventListener("pointermove", move);
  window.addEventListener("pointerup", up);
}

// ------------------------------------------------------------ interval edits

function renderIntervalRows(): void {
  ui.intervalRows.replaceChildren();
  state.draftIntervals.forEach((iv, index) => {
    const row = document.createElement("div");
    row.className = "interval-row";
    const start = document.createElement("input");
    start.type = "number";
    start.step = "0.01";
    start.value = String(iv.start);
    const end = document.createElement("input");
    end.type = "number";
    end.step = "0.01";
    end.value = String(iv.end);
    start.addEventListener("change", () => {
      iv.start = start.valueAsNumber;
      renderTimeline();
    });
    end.addEventListener("change", () => {
      iv.end = end.valueAsNumber;
      renderTimeline();
    });
    const remove = document.createElement("button");
    remove.type = "button";
    remove.textContent = "remove";
    remove.addEventListener("click", () => {
      state.draftIntervals.splice(index, 1);
      renderTimeline();
      renderIntervalRows();
    });
    row.append(start, document.createTextNode("–"), end, remove);
    ui.intervalRows.append(row);
  });
}

// ------------------------------------------------------------------- verdict

async function submit(action: VerdictAction): Promise<void> {
  const item = state.selected;
  if (!item) return;
  const request = buildVerdict(item, {
    action,
    question: ui.question.value,
    intervals: state.draftIntervals,
  });
  const problems = validateVerdict(item, request);
  if (problems.length > 0) {
    ui.problems.textContent = problems.join("\n");
    return; // edits stay in place for the reviewer to fix
  }
  try {
    await api.submitVerdict(request, ui.reviewerId.value.trim() || "anonymous");
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      ui.problems.textContent = err.detail; // server message, verbatim
    } else {
      showBanner(err instanceof ApiError ? err.detail : `submit failed: ${err}`);
    }
    return;
  }
  // Mirror the server: reload the item and the queue. Under the default
  // "pending" filter a decided item drops out of the list on refresh.
  const fresh = await api.getItem(item.qa.qa_id).catch(() => null);
  if (fresh) loadItem(fresh);
  await refreshQueue();
}

// -------------------------------------------------------------------- wiring

ui.retryBtn.addEventListener("click", () => void refreshQueue());
for (const select of [ui.filterStatus, ui.filterDuration, ui.filterType]) {
  select.addEventListener("change", () => {
    state.page = 1;
    void refreshQueue();
  });
}
// Needle count narrows the already-fetched page; no server round trip.
ui.filterCount.addEventListener("change", () => renderQueue());
ui.pagePrev.addEventListener("click", () => {
  state.page = Math.max(1, state.page - 1);
  void refreshQueue();
});
ui.pageNext.addEventListener("click", () => {
  state.page += 1;
  void refreshQueue();
});

ui.zoomIn.addEventListener("click", () => applyZoom(0.5));
ui.zoomOut.addEventListener("click", () => applyZoom(2.0));
ui.zoomReset.addEventListener("click", () => {
  if (!state.selected) return;
  state.window = fullWindow(state.selected.total_duration);
  renderTimeline();
});
ui.panLeft.addEventListener("click", () => applyPan(-0.25));
ui.panRight.addEventListener("click", () => applyPan(0.25));

function applyZoom(factor: number): void {
  if (!state.selected) return;
  const center = (state.window.start + state.window.end) / 2;
  state.window = zoomWindow(state.window, state.selected.total_duration, center, factor);
  renderTimeline();
}

function applyPan(fraction: number): void {
  if (!state.selected) return;
  state.window = panWindow(state.window, state.selected.total_duration, fraction);
  renderTimeline();
}

ui.intervalAdd.addEventListener("click", () => {
  const item = state.selected;
  if (!item) return;
  const last = state.draftIntervals[state.draftIntervals.length - 1];
  const start = last ? Math.min(last.end, item.total_duration - 1) : 0;
  state.draftIntervals.push({ start, end: Math.min(start + 5, item.total_duration) });
  renderTimeline();
  renderIntervalRows();
});

ui.accept.addEventListener("click", () => void submit("ACCEPT"));
ui.refine.addEventListener("click", () => void submit("REFINE"));
ui.reject.addEventListener("click", () => void submit("REJECT"));

void refreshQueue();
