/**
 * Workbench shell: header, notice banner, and the three view tabs.
 *
 * One WorkbenchApp owns the session and re-renders whatever tab is active
 * each time the session changes. A 2 s poll keeps the mirror fresh when
 * somebody else edits the project.
 */

import { ApiClient } from "./api.js";
import { ConflictConsole } from "./conflict-console.js";
import { clear, el } from "./dom.js";
import { ReviewBoard } from "./review-board.js";
import { WorkbenchSession } from "./session.js";
import { TraceBrowser } from "./trace-browser.js";
import type { ActorLabel } from "./types.js";

export const POLL_INTERVAL_MS = 2000;

type ViewTab = "review" | "conflicts" | "trace";

export class WorkbenchApp {
  readonly session: WorkbenchSession;

  private readonly board: ReviewBoard;
  private readonly console: ConflictConsole;
  private readonly browser: TraceBrowser;
  private root: HTMLElement | null = null;
  private tab: ViewTab = "review";
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(session: WorkbenchSession) {
    this.session = session;
    this.board = new ReviewBoard(session);
    this.console = new ConflictConsole(session);
    this.browser = new TraceBrowser(session);
    session.subscribe(() => {
      if (this.root) {
        this.render(this.root);
      }
    });
  }

  async mount(root: HTMLElement): Promise<void> {
    this.root = root;
    await this.session.refresh();
    this.render(root);
  }

  startPolling(intervalMs = POLL_INTERVAL_MS): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.session.pollOnce().catch(() => undefined); // server may be gone
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  showTab(tab: ViewTab): void {
    this.tab = tab;
    if (this.root) {
      this.render(this.root);
    }
  }

  render(root: HTMLElement): void {
    this.root = root;
    clear(root);
    root.append(this.header());
    root.append(this.banner());
    root.append(this.tabBar());
    const view = el("main", "view");
    view.dataset.view = this.tab;
    if (this.tab === "review") {
      this.board.render(view);
    } else if (this.tab === "conflicts") {
      this.console.render(view);
    } else {
      this.browser.render(view);
    }
    root.append(view);
  }

  private header(): HTMLElement {
    const head = el("header", "workbench-header");
    head.append(el("h1", "workbench-title", "piforge workbench"));
    const process = this.session.process;
    head.append(el("span", "phase-badge", process ? process.phase : "loading"));
    const actor: ActorLabel = this.session.actor;
    head.append(el("span", "actor-badge", `${actor.role} ${actor.name}`));
    const digest = el("span", "digest-badge", this.session.digest.slice(0, 12));
    digest.title = this.session.digest;
    head.append(digest);
    return head;
  }

  private banner(): HTMLElement {
    const region = el("div", "banner-region");
    const notice = this.session.notice;
    if (notice) {
      const banner = el("div", `banner banner-${notice.kind}`, notice.text);
      const dismiss = el("button", "banner-dismiss", "dismiss");
      dismiss.addEventListener("click", () => this.session.dismissNotice());
      banner.append(dismiss);
      region.append(banner);
    }
    return region;
  }

  private tabBar(): HTMLElement {
    const bar = el("nav", "view-tabs");
    const labels: [ViewTab, string][] = [
      ["review", "review board"],
      ["conflicts", "conflict console"],
      ["trace", "trace browser"],
    ];
    for (const [tab, label] of labels) {
      const button = el("button", this.tab === tab ? "view-tab active" : "view-tab", label);
      button.dataset.view = tab;
      button.addEventListener("click", () => this.showTab(tab));
      bar.append(button);
    }
    return bar;
  }
}

/** Entry point used by the static shell. */
export async function startWorkbench(root: HTMLElement, actor: ActorLabel): Promise<WorkbenchApp> {
  const session = new WorkbenchSession(new ApiClient(""), actor);
  const app = new WorkbenchApp(session);
  await app.mount(root);
  app.startPolling();
  return app;
}
