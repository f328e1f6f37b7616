/** Wire types, mirroring the service JSON field for field. */

export type PredictedClass = "masking" | "coping" | "congruent";
export type PromptKey = "masking" | "coping" | "none";

export interface JournalEntry {
  entry_id: number;
  created_at: string;
  text: string;
  predicted_class: PredictedClass;
  class_probs: number[];
  mismatch_S: number;
  prompt_key: PromptKey;
}

export interface ListRow {
  entry_id: number;
  created_at: string;
  predicted_class: PredictedClass;
  mismatch_S: number;
}

export interface PromptsPayload {
  threshold: number;
  prompts: Record<string, string>;
}

export interface HealthPayload {
  status: string;
  entries: number;
  checkpoint_loaded: boolean;
}
