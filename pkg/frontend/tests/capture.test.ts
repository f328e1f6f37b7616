import { beforeEach, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import type { ScreenContext } from "../src/ctx.js";
import { renderCapture } from "../src/screens/capture.js";
import { ScoreToggle } from "../src/toggle.js";
import { entry, flush, makeFileList, mockFetch, type Routes } from "./helpers.js";

function mount(routes: Routes) {
  const mock = mockFetch(routes);
  const navigations: Array<{ hash: string; notice?: string }> = [];
  const ctx: ScreenContext = {
    api: new ServiceClient("", mock.fetchFn),
    toggle: new ScoreToggle(window.localStorage),
    navigate: (hash, notice) => navigations.push({ hash, notice }),
  };
  const root = document.createElement("div");
  document.body.append(root);
  renderCapture(root, ctx);
  return { root, mock, navigations };
}

function fillDraft(root: HTMLElement) {
  const textarea = root.querySelector("textarea")!;
  textarea.value = "Bright words, heavy voice.";
  const file = new File([new Uint8Array([82, 73, 70, 70])], "take.wav", {
    type: "audio/wav",
  });
  const input = root.querySelector<HTMLInputElement>("input[type=file]")!;
  Object.defineProperty(input, "files", { value: makeFileList(file), configurable: true });
  input.dispatchEvent(new Event("change"));
  return { textarea, input, file };
}

function submit(root: HTMLElement) {
  root.querySelector("form")!.dispatchEvent(new Event("submit", { cancelable: true }));
  return flush();
}

beforeEach(() => {
  document.body.innerHTML = "";
  window.localStorage.clear();
});

describe("capture screen", () => {
  it("contains zero analysis elements and no analysis vocabulary", () => {
    const { root } = mount({});
    expect(root.querySelectorAll("[data-analysis]")).toHaveLength(0);
    const text = root.textContent ?? "";
    expect(text).not.toMatch(/score|mismatch|class|prompt|masking|coping|congruent/i);
  });

  it("submits the draft and navigates to the list without showing analysis", async () => {
    const { root, mock, navigations } = mount({
      "POST /entries": () => ({ status: 201, body: entry() }),
    });
    fillDraft(root);
    await submit(root);

    const call = mock.calls[0]!;
    const form = call.init?.body as FormData;
    expect(form.get("text")).toBe("Bright words, heavy voice.");
    expect((form.get("audio") as File).size).toBe(4);

    expect(navigations).toEqual([{ hash: "#/", notice: undefined }]);
    expect(root.querySelectorAll("[data-analysis]")).toHaveLength(0);
    expect(root.textContent).not.toMatch(/masking|0\.48/);
  });

  it("keeps the draft and shows the service detail inline on a 422", async () => {
    const { root, navigations } = mount({
      "POST /entries": () => ({ status: 422, body: { detail: "not a valid WAV file" } }),
    });
    const { textarea } = fillDraft(root);
    await submit(root);

    expect(root.querySelector(".status")!.textContent).toContain("not a valid WAV file");
    expect(textarea.value).toBe("Bright words, heavy voice.");
    expect(root.textContent).toContain("take.wav");
    expect(navigations).toHaveLength(0);
  });

  it("offers retry with the same draft when the service is unreachable", async () => {
    let attempts = 0;
    const navigations: Array<{ hash: string }> = [];
    const api = new ServiceClient("", async (url, init) => {
      attempts += 1;
      if (attempts === 1) throw new TypeError("network down");
      expect((init?.body as FormData).get("text")).toBe("Bright words, heavy voice.");
      return {
        ok: true,
        status: 201,
        statusText: "",
        json: async () => entry(),
      } as unknown as Response;
    });
    const root = document.createElement("div");
    document.body.append(root);
    renderCapture(root, {
      api,
      toggle: new ScoreToggle(window.localStorage),
      navigate: (hash) => navigations.push({ hash }),
    });

    fillDraft(root);
    await submit(root);
    expect(root.querySelector(".status")!.textContent).toContain("draft is kept");
    const retry = root.querySelector<HTMLButtonElement>("button.retry")!;
    expect(retry).not.toBeNull();

    retry.click();
    await flush();
    expect(attempts).toBe(2);
    expect(navigations).toEqual([{ hash: "#/" }]);
  });

  it("refuses to submit without words or audio", async () => {
    const { root, mock } = mount({});
    await submit(root);
    expect(root.querySelector(".status")!.textContent).toContain("few words");

    root.querySelector("textarea")!.value = "words only";
    await submit(root);
    expect(root.querySelector(".status")!.textContent).toContain("voice note");
    expect(mock.calls).toHaveLength(0);
  });
});
