/**
 * Typed client for the review service API (see api-schema.md).
 *
 * Every call goes through the service; the client caches nothing and owns no
 * state beyond the base URL and reviewer id.
 */

import type {
  ExportResponse,
  ItemFilter,
  ItemPage,
  ReviewItem,
  VerdictRequest,
  VerdictResponse,
} from "./types.js";

/**
 * A non-2xx response. `detail` is the server's own message, verbatim when the
 * body carried a string detail, otherwise a readable fallback.
 */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

/** Extract the FastAPI-style detail from an error body, best effort. */
async function errorDetail(response: Response): Promise<string> {
  let text = "";
  try {
    text = await response.text();
  } catch {
    return response.statusText;
  }
  try {
    const body = JSON.parse(text);
    if (typeof body?.detail === "string") return body.detail;
    if (body?.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    // not JSON; fall through to the raw text
  }
  return text || response.statusText;
}

export class ReviewApi {
  /** Origin of the service, no trailing slash. Empty string = same origin. */
  readonly baseUrl: string;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  /** List review items, optionally filtered and paginated. */
  listItems(filter: ItemFilter = {}): Promise<ItemPage> {
    const params = new URLSearchParams();
    if (filter.status) params.set("status", filter.status);
    if (filter.duration_class) params.set("duration_class", filter.duration_class);
    if (filter.needle_type) params.set("needle_type", filter.needle_type);
    if (filter.page !== undefined) params.set("page", String(filter.page));
    if (filter.page_size !== undefined) params.set("page_size", String(filter.page_size));
    const query = params.toString();
    return this.request<ItemPage>(`/api/v1/items${query ? "?" + query : ""}`);
  }

  /** Fetch a single item by QA id. */
  getItem(qaId: string): Promise<ReviewItem> {
    return this.request<ReviewItem>(`/api/v1/items/${encodeURIComponent(qaId)}`);
  }

  /**
   * Submit a verdict. The server stores the reviewer id from the
   * X-Reviewer-Id header and timestamps the verdict itself.
   */
  submitVerdict(body: VerdictRequest, reviewerId: string): Promise<VerdictResponse> {
    return this.request<VerdictResponse>("/api/v1/verdicts", {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Reviewer-Id": reviewerId,
      },
      body: JSON.stringify(body),
    });
  }

  /** Export the cleaned dataset reflecting all verdicts so far. */
  exportClean(): Promise<ExportResponse> {
    return this.request<ExportResponse>("/api/v1/export", { method: "POST" });
  }

  /** URL of the montage video; the endpoint 404s when no media is staged. */
  mediaUrl(montageId: string): string {
    return `${this.baseUrl}/media/${encodeURIComponent(montageId)}`;
  }

  /**
   * Probe whether media exists for a montage so the UI can decide between
   * video playback and timeline-only mode without surfacing a 404.
   */
  async hasMedia(montageId: string): Promise<boolean> {
    try {
      const response = await fetch(this.mediaUrl(montageId), { method: "HEAD" });
      return response.ok;
    } catch {
      return false;
    }
  }
}
