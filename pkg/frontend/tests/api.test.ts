import { describe, expect, it } from "vitest";

import { ServiceClient, ServiceError } from "../src/api.js";
import { entry, listRow, mockFetch } from "./helpers.js";

describe("ServiceClient", () => {
  it("lists entries with and without a limit", async () => {
    const mock = mockFetch({
      "GET /entries": () => ({ status: 200, body: [listRow()] }),
      "GET /entries?limit=5": () => ({ status: 200, body: [] }),
    });
    const api = new ServiceClient("", mock.fetchFn);
    expect(await api.listEntries()).toHaveLength(1);
    expect(await api.listEntries(5)).toHaveLength(0);
    expect(mock.calls.map((c) => c.url)).toEqual(["/entries", "/entries?limit=5"]);
  });

  it("prefixes every path with the configured base URL", async () => {
    const mock = mockFetch({
      "GET http://svc:8077/entries/3": () => ({ status: 200, body: entry({ entry_id: 3 }) }),
    });
    const api = new ServiceClient("http://svc:8077", mock.fetchFn);
    expect((await api.getEntry(3)).entry_id).toBe(3);
    expect(api.audioUrl(7)).toBe("http://svc:8077/entries/7/audio");
  });

  it("creates entries as multipart form data without a manual content type", async () => {
    const mock = mockFetch({
      "POST /entries": () => ({ status: 201, body: entry() }),
    });
    const api = new ServiceClient("", mock.fetchFn);
    const blob = new Blob([new Uint8Array([1, 2, 3])], { type: "audio/wav" });
    const created = await api.createEntry("hello there", blob);
    expect(created.entry_id).toBe(1);

    const call = mock.calls[0]!;
    expect(call.init?.method).toBe("POST");
    expect(call.init?.headers).toBeUndefined();
    const form = call.init?.body as FormData;
    expect(form.get("text")).toBe("hello there");
    const file = form.get("audio") as File;
    expect(file.name).toBe("entry.wav");
    expect(file.size).toBe(3);
  });

  it("surfaces service rejections as ServiceError with the detail text", async () => {
    const mock = mockFetch({
      "POST /entries": () => ({ status: 422, body: { detail: "not a valid WAV file" } }),
    });
    const api = new ServiceClient("", mock.fetchFn);
    const failure = api.createEntry("x", new Blob([new Uint8Array(1)]));
    await expect(failure).rejects.toBeInstanceOf(ServiceError);
    await expect(failure).rejects.toMatchObject({ status: 422, detail: "not a valid WAV file" });
  });

  it("falls back to a generic detail when the error body is not JSON", async () => {
    const fetchFn = async () =>
      ({
        ok: false,
        status: 500,
        statusText: "Internal Server Error",
        json: async () => {
          throw new Error("no body");
        },
      }) as unknown as Response;
    const api = new ServiceClient("", fetchFn);
    await expect(api.health()).rejects.toMatchObject({
      status: 500,
      detail: "Internal Server Error",
    });
  });
});
