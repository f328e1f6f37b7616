import { ServiceClient } from "./api.js";
import { App } from "./app.js";
import { ScoreToggle } from "./toggle.js";

declare global {
  interface Window {
    /** Optional override; defaults to same-origin. */
    SERVICE_BASE_URL?: string;
  }
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const api = new ServiceClient(window.SERVICE_BASE_URL ?? "");
new App(root, api, new ScoreToggle(window.localStorage)).start();
