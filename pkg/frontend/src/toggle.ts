/** Score-visibility toggle for the list screen. Hidden by default;
 * the choice persists across reloads. */

const STORAGE_KEY = "dissonance.showScores";

export class ScoreToggle {
  constructor(private readonly storage: Storage) {}

  get(): boolean {
    return this.storage.getItem(STORAGE_KEY) === "true";
  }

  set(value: boolean): void {
    this.storage.setItem(STORAGE_KEY, String(value));
  }
}
