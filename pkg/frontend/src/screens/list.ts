/** Journal list: newest first, analysis hidden until asked for. The
 * toggle's state survives reloads; rows carry scores and class colors
 * only while it is on. */

import type { ScreenContext } from "../ctx.js";
import { clear, el } from "../dom.js";
import { toViewModel } from "../viewmodel.js";

export async function renderList(
  root: HTMLElement,
  ctx: ScreenContext,
  notice?: string,
): Promise<void> {
  clear(root);

  const header = el("header", { class: "list-header" }, [
    el("h2", { text: "Journal" }),
    el("a", { href: "#/capture", class: "new-entry", text: "New entry" }),
  ]);

  const checkbox = el("input", { type: "checkbox", "aria-label": "Show scores" });
  checkbox.checked = ctx.toggle.get();
  const toggleLabel = el("label", { class: "score-toggle" }, [checkbox, "Show scores"]);
  checkbox.addEventListener("change", () => {
    ctx.toggle.set(checkbox.checked);
    void renderList(root, ctx);
  });

  root.append(header, toggleLabel);
  if (notice) root.append(el("p", { class: "notice", role: "alert", text: notice }));

  let rows;
  try {
    rows = await ctx.api.listEntries();
  } catch {
    root.append(el("p", { class: "status", text: "Could not reach the journal service." }));
    return;
  }

  if (rows.length === 0) {
    root.append(el("p", { class: "empty-state", "data-empty": "true", text: "No entries yet. Start your first one." }));
    return;
  }

  const showScores = ctx.toggle.get();
  const items = rows.map((row) => {
    const vm = toViewModel(row);
    const when = el("time", { datetime: vm.createdAt, text: new Date(vm.createdAt).toLocaleString() });
    const link = el("a", { href: `#/entry/${vm.entryId}`, class: "entry-link" }, [when]);
    const li = el("li", { class: "entry-row" }, [link]);
    if (showScores) {
      li.append(
        el("span", {
          class: `badge class-${vm.color}`,
          "data-analysis": "true",
          "data-color": vm.color,
          text: `${vm.classLabel} ${vm.score}`,
        }),
      );
    }
    return li;
  });
  root.append(el("ul", { class: "entries" }, items));
}
