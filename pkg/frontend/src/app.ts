/** Hash router wiring the three screens to one root element. */

import type { ServiceClient } from "./api.js";
import type { ScreenContext } from "./ctx.js";
import { renderCapture } from "./screens/capture.js";
import { renderDetail } from "./screens/detail.js";
import { renderList } from "./screens/list.js";
import type { ScoreToggle } from "./toggle.js";

export class App {
  private pendingNotice: string | null = null;
  private readonly ctx: ScreenContext;

  constructor(
    private readonly root: HTMLElement,
    api: ServiceClient,
    toggle: ScoreToggle,
  ) {
    this.ctx = { api, toggle, navigate: this.navigate };
  }

  navigate = (hash: string, notice?: string): void => {
    if (notice !== undefined) this.pendingNotice = notice;
    if (location.hash === hash) {
      void this.render();
    } else {
      location.hash = hash;
    }
  };

  async render(): Promise<void> {
    const notice = this.pendingNotice ?? undefined;
    this.pendingNotice = null;
    const hash = location.hash;
    const detail = /^#\/entry\/(\d+)$/.exec(hash);
    if (hash === "#/capture") {
      renderCapture(this.root, this.ctx);
    } else if (detail) {
      await renderDetail(this.root, this.ctx, Number(detail[1]));
    } else {
      await renderList(this.root, this.ctx, notice);
    }
  }

  start(): void {
    window.addEventListener("hashchange", () => void this.render());
    void this.render();
  }
}
