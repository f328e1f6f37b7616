import { beforeEach, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import type { ScreenContext } from "../src/ctx.js";
import { renderList } from "../src/screens/list.js";
import { ScoreToggle } from "../src/toggle.js";
import { flush, listRow, mockFetch, type Routes } from "./helpers.js";

const THREE_ROWS = [
  listRow({ entry_id: 3, predicted_class: "masking", mismatch_S: 0.4781105093708875 }),
  listRow({ entry_id: 2, predicted_class: "coping", mismatch_S: 0.051 }),
  listRow({ entry_id: 1, predicted_class: "congruent", mismatch_S: 0.012 }),
];

function mount(routes: Routes) {
  const mock = mockFetch(routes);
  const ctx: ScreenContext = {
    api: new ServiceClient("", mock.fetchFn),
    toggle: new ScoreToggle(window.localStorage),
    navigate: () => {},
  };
  const root = document.createElement("div");
  document.body.append(root);
  return { root, ctx, mock };
}

beforeEach(() => {
  document.body.innerHTML = "";
  window.localStorage.clear();
});

describe("list screen", () => {
  it("hides all analysis by default and keeps the service's row order", async () => {
    const { root, ctx } = mount({
      "GET /entries": () => ({ status: 200, body: THREE_ROWS }),
    });
    await renderList(root, ctx);

    expect(root.querySelectorAll("[data-analysis]")).toHaveLength(0);
    expect(root.querySelectorAll(".badge")).toHaveLength(0);
    expect(root.textContent).not.toMatch(/masking|coping|congruent/);

    const links = [...root.querySelectorAll("a.entry-link")];
    expect(links.map((a) => a.getAttribute("href"))).toEqual([
      "#/entry/3",
      "#/entry/2",
      "#/entry/1",
    ]);
    for (const link of links) {
      expect(link.querySelector("time")!.getAttribute("datetime")).toBe(
        "2026-08-16T06:43:52.079642+00:00",
      );
    }
  });

  it("shows rounded scores with class colors when toggled on, and remembers the choice", async () => {
    const { root, ctx } = mount({
      "GET /entries": () => ({ status: 200, body: THREE_ROWS }),
    });
    await renderList(root, ctx);

    root.querySelector<HTMLInputElement>("input[type=checkbox]")!.click();
    await flush();

    const badges = [...root.querySelectorAll("[data-analysis]")];
    expect(badges.map((b) => b.textContent)).toEqual([
      "masking 0.48",
      "coping 0.05",
      "congruent 0.01",
    ]);
    expect(badges.map((b) => b.getAttribute("data-color"))).toEqual(["red", "orange", "teal"]);
    expect(window.localStorage.getItem("dissonance.showScores")).toBe("true");
  });

  it("restores the stored toggle state on a fresh render and can turn back off", async () => {
    window.localStorage.setItem("dissonance.showScores", "true");
    const { root, ctx } = mount({
      "GET /entries": () => ({ status: 200, body: THREE_ROWS }),
    });
    await renderList(root, ctx);

    expect(root.querySelector<HTMLInputElement>("input[type=checkbox]")!.checked).toBe(true);
    expect(root.querySelectorAll("[data-analysis]")).toHaveLength(3);

    root.querySelector<HTMLInputElement>("input[type=checkbox]")!.click();
    await flush();
    expect(root.querySelectorAll("[data-analysis]")).toHaveLength(0);
    expect(window.localStorage.getItem("dissonance.showScores")).toBe("false");
  });

  it("shows the empty state when the journal has no entries", async () => {
    const { root, ctx } = mount({ "GET /entries": () => ({ status: 200, body: [] }) });
    await renderList(root, ctx);
    expect(root.querySelector("[data-empty]")!.textContent).toBe(
      "No entries yet. Start your first one.",
    );
  });

  it("announces a notice banner when one is passed in", async () => {
    const { root, ctx } = mount({ "GET /entries": () => ({ status: 200, body: [] }) });
    await renderList(root, ctx, "Entry 9 is not in the journal.");
    const notice = root.querySelector(".notice")!;
    expect(notice.getAttribute("role")).toBe("alert");
    expect(notice.textContent).toBe("Entry 9 is not in the journal.");
  });

  it("reports when the service cannot be reached", async () => {
    const api = new ServiceClient("", async () => {
      throw new TypeError("network down");
    });
    const root = document.createElement("div");
    await renderList(root, {
      api,
      toggle: new ScoreToggle(window.localStorage),
      navigate: () => {},
    });
    expect(root.textContent).toContain("Could not reach the journal service.");
  });
});
