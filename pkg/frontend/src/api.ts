/** Typed client for the reformulation service.
 *
 * One in-flight request per action kind: submitting again aborts the
 * pending call of the same kind, so late responses can never clobber a
 * newer round. Aborted calls reject with AbortError, which callers treat
 * as "ignore", not as a failure.
 */

import type { ReformulateResponse, SearchResponse } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(private fetchFn: FetchLike, private base = "") {}

  private async post<T>(kind: string, path: string, body: unknown): Promise<T> {
    this.controllers.get(kind)?.abort();
    const controller = new AbortController();
    this.controllers.set(kind, controller);
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal: controller.signal,
    });
    if (!response.ok) {
      let message = `request failed (${response.status})`;
      try {
        const payload = await response.json();
        if (payload && typeof payload.error === "string") {
          message = payload.error;
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(message, response.status);
    }
    return (await response.json()) as T;
  }

  reformulate(query: string, opts: { k?: number; strategy?: string } = {}) {
    return this.post<ReformulateResponse>("reformulate", "/reformulate",
      { query, ...opts });
  }

  search(query: string, topN?: number) {
    return this.post<SearchResponse>("search", "/search",
      topN === undefined ? { query } : { query, top_n: topN });
  }
}
