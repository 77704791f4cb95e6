/** Thin fetch client over the review endpoints. */

import type { Box, ImagePage, LabelsDoc, Stats } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private base = "",
    private fetchFn: FetchLike = (i, init) => fetch(i, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return (await resp.json()) as T;
  }

  listImages(state?: string, pageSize = 1000): Promise<ImagePage> {
    const query = state ? `?state=${state}&page_size=${pageSize}` : `?page_size=${pageSize}`;
    return this.request<ImagePage>(`/images${query}`);
  }

  rasterUrl(id: number): string {
    return `${this.base}/images/${id}/raster`;
  }

  getLabels(id: number): Promise<LabelsDoc> {
    return this.request<LabelsDoc>(`/images/${id}/labels`);
  }

  /** PUT with optimistic concurrency; a 409 comes back as {conflict}. */
  async putLabels(
    id: number,
    boxes: Box[],
    revision: number,
    state: "accepted" | "corrected",
  ): Promise<{ ok: boolean; conflict: boolean; revision: number }> {
    const resp = await this.fetchFn(`${this.base}/images/${id}/labels`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ boxes, revision, state }),
    });
    if (resp.status === 409) {
      return { ok: false, conflict: true, revision };
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    const doc = (await resp.json()) as { revision: number };
    return { ok: true, conflict: false, revision: doc.revision };
  }

  getStats(): Promise<Stats> {
    return this.request<Stats>("/stats");
  }
}

/** Retry transient network failures with exponential backoff. */
export async function withBackoff<T>(
  op: () => Promise<T>,
  attempts = 3,
  baseDelayMs = 250,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<T> {
  let lastErr: unknown;
  for (let i = 0; i < attempts; i++) {
    try {
      return await op();
    } catch (err) {
      if (err instanceof ApiError) throw err; // HTTP errors are not transient
      lastErr = err;
      if (i < attempts - 1) await sleep(baseDelayMs * 2 ** i);
    }
  }
  throw lastErr;
}
