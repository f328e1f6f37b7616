/** Detail screen: the full analysis for one entry — large mismatch
 * score, colored class label, probabilities, playback — and the
 * service's reflective prompt exactly when the service sent one. */

import { ServiceError } from "../api.js";
import type { ScreenContext } from "../ctx.js";
import { clear, el } from "../dom.js";
import type { JournalEntry, PromptsPayload } from "../types.js";
import { formatScore, toViewModel } from "../viewmodel.js";

const PROB_LABELS = ["masking", "coping", "congruent"] as const;

export async function renderDetail(
  root: HTMLElement,
  ctx: ScreenContext,
  entryId: number,
): Promise<void> {
  clear(root);

  let entry: JournalEntry;
  try {
    entry = await ctx.api.getEntry(entryId);
  } catch (err) {
    if (err instanceof ServiceError && err.status === 404) {
      ctx.navigate("#/", `Entry ${entryId} is not in the journal.`);
      return;
    }
    root.append(el("p", { class: "status", text: "Could not load this entry." }));
    return;
  }

  let prompts: PromptsPayload | undefined;
  if (entry.prompt_key !== "none") {
    prompts = await ctx.api.getPrompts();
  }
  const vm = toViewModel(entry, prompts);

  const audio = el("audio", { controls: "", src: ctx.api.audioUrl(vm.entryId) });
  const probs = entry.class_probs
    .map((p, i) => `${PROB_LABELS[i] ?? `class ${i}`} ${formatScore(p)}`)
    .join(" · ");

  const analysis = el("section", { class: "analysis" }, [
    el("div", {
      class: "score-large",
      "data-analysis": "true",
      text: vm.score,
    }),
    el("span", {
      class: `badge class-${vm.color}`,
      "data-analysis": "true",
      "data-color": vm.color,
      text: vm.classLabel,
    }),
    el("p", { class: "probs", "data-analysis": "true", text: probs }),
  ]);

  root.append(
    el("p", {}, [el("a", { href: "#/", text: "Back to journal" })]),
    el("h2", {}, [
      el("time", { datetime: vm.createdAt, text: new Date(vm.createdAt).toLocaleString() }),
    ]),
    el("p", { class: "entry-text", text: entry.text }),
    audio,
    analysis,
  );

  if (vm.promptText !== null) {
    root.append(
      el("section", { class: "prompt", "data-analysis": "true", "data-prompt": "true" }, [
        el("blockquote", { text: vm.promptText }),
        el("p", {}, [el("a", { href: "#/capture", text: "Start a new entry" })]),
      ]),
    );
  } else {
    root.append(el("p", {}, [el("a", { href: "#/capture", text: "Start a new entry" })]));
  }
}
