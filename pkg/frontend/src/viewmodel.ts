/** Presentation model for one entry. Every field is copied or formatted
 * from service JSON; nothing here re-derives the score, the class, or
 * whether a prompt is due. */

import type { JournalEntry, ListRow, PredictedClass, PromptsPayload } from "./types.js";

export type ClassColor = "teal" | "orange" | "red";

export const CLASS_COLORS: Record<PredictedClass, ClassColor> = {
  congruent: "teal",
  coping: "orange",
  masking: "red",
};

export interface EntryViewModel {
  entryId: number;
  createdAt: string;
  classLabel: PredictedClass;
  color: ClassColor;
  /** Mismatch score rendered to exactly two decimals. */
  score: string;
  /** Verbatim service prompt copy, or null when the service sent no key. */
  promptText: string | null;
}

export function formatScore(mismatchS: number): string {
  return mismatchS.toFixed(2);
}

export function toViewModel(
  entry: JournalEntry | ListRow,
  prompts?: PromptsPayload,
): EntryViewModel {
  const promptKey = "prompt_key" in entry ? entry.prompt_key : "none";
  const promptText =
    promptKey !== "none" ? (prompts?.prompts[promptKey] ?? null) : null;
  return {
    entryId: entry.entry_id,
    createdAt: entry.created_at,
    classLabel: entry.predicted_class,
    color: CLASS_COLORS[entry.predicted_class],
    score: formatScore(entry.mismatch_S),
    promptText,
  };
}
