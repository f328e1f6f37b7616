import type { ServiceClient } from "./api.js";
import type { ScoreToggle } from "./toggle.js";

/** Dependencies handed to every screen. Screens never touch globals, so
 * tests can drive them with a mocked service and a spy router. */
export interface ScreenContext {
  api: ServiceClient;
  toggle: ScoreToggle;
  navigate: (hash: string, notice?: string) => void;
}
