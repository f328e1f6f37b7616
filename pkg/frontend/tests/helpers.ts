/** Test doubles: a route-table fetch mock so contract tests drive the
 * real ServiceClient with canned service JSON. */

import type { FetchLike } from "../src/api.js";
import type { JournalEntry, ListRow } from "../src/types.js";

export interface CannedResponse {
  status: number;
  body: unknown;
}

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

export type Routes = Record<string, (init?: RequestInit) => CannedResponse>;

export interface MockFetch {
  fetchFn: FetchLike;
  calls: RecordedCall[];
}

export function mockFetch(routes: Routes): MockFetch {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    const key = `${init?.method ?? "GET"} ${url}`;
    const route = routes[key];
    if (!route) throw new Error(`unmocked route: ${key}`);
    const { status, body } = route(init);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: "",
      json: async () => body,
    } as unknown as Response;
  };
  return { fetchFn, calls };
}

export function entry(overrides: Partial<JournalEntry> = {}): JournalEntry {
  return {
    entry_id: 1,
    created_at: "2026-08-16T06:43:52.079642+00:00",
    text: "Today went well.",
    predicted_class: "masking",
    class_probs: [0.9352, 0.0212, 0.0436],
    mismatch_S: 0.4781105093708875,
    prompt_key: "masking",
    ...overrides,
  };
}

export function listRow(overrides: Partial<ListRow> = {}): ListRow {
  return {
    entry_id: 1,
    created_at: "2026-08-16T06:43:52.079642+00:00",
    predicted_class: "masking",
    mismatch_S: 0.4781105093708875,
    ...overrides,
  };
}

export function makeFileList(file: File): FileList {
  return {
    0: file,
    length: 1,
    item: (i: number) => (i === 0 ? file : null),
  } as unknown as FileList;
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
