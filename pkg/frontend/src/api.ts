/** Thin typed client over the journal service's HTTP+JSON interface.
 * The only configuration is the service base URL; a fetch function is
 * injectable so contract tests can mock the service. */

import type { HealthPayload, JournalEntry, ListRow, PromptsPayload } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`service responded ${status}: ${detail}`);
    this.name = "ServiceError";
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return res.statusText || "request failed";
  }
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) throw new ServiceError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  listEntries(limit?: number): Promise<ListRow[]> {
    const query = limit === undefined ? "" : `?limit=${limit}`;
    return this.request<ListRow[]>(`/entries${query}`);
  }

  getEntry(id: number): Promise<JournalEntry> {
    return this.request<JournalEntry>(`/entries/${id}`);
  }

  /** Multipart create. Content-Type is left to the platform so the
   * browser sets the multipart boundary itself. */
  createEntry(text: string, audio: Blob): Promise<JournalEntry> {
    const form = new FormData();
    form.append("text", text);
    form.append("audio", audio, "entry.wav");
    return this.request<JournalEntry>("/entries", { method: "POST", body: form });
  }

  getPrompts(): Promise<PromptsPayload> {
    return this.request<PromptsPayload>("/prompts");
  }

  health(): Promise<HealthPayload> {
    return this.request<HealthPayload>("/healthz");
  }

  audioUrl(id: number): string {
    return `${this.baseUrl}/entries/${id}/audio`;
  }
}
