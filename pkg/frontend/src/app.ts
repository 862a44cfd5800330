// SPA wiring: hash routing, run-state polling and screen composition.
// All state lives in the gateway; reloading any screen rebuilds it from the
// API alone (the session token is the only client-side state).

import { ApiClient } from "./api.js";
import { buildHeatmapModel, renderHeatmap } from "./heatmap.js";
import type { RunSummary } from "./types.js";
import {
  el,
  renderApprovalScreen,
  renderRunStatus,
  renderTestCaseList,
  renderVerdicts,
} from "./views.js";

const POLL_INTERVAL_MS = 2000;
const ACTIVE_STATES = new Set(["created", "flow_pending", "validating", "debugging"]);

export class App {
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly doc: Document,
  ) {}

  start(): void {
    globalThis.addEventListener?.("hashchange", () => void this.route());
    void this.route();
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  async route(): Promise<void> {
    this.stopPolling();
    const hash = globalThis.location?.hash ?? "";
    const runMatch = /^#\/runs\/(.+)$/.exec(hash);
    try {
      if (runMatch) {
        await this.showRun(decodeURIComponent(runMatch[1]));
      } else {
        await this.showTestCases();
      }
    } catch (error) {
      this.root.replaceChildren(
        el(this.doc, "p", "error", `error: ${(error as Error).message}`),
      );
    }
  }

  private async showTestCases(): Promise<void> {
    const cases = await this.api.listTestCases();
    const screen = el(this.doc, "div");
    screen.appendChild(el(this.doc, "h1", undefined, "Test cases"));
    screen.appendChild(
      renderTestCaseList(this.doc, cases, (tcId, logContent) => {
        void this.api.createRun(tcId, logContent).then((run) => {
          globalThis.location.hash = `#/runs/${encodeURIComponent(run.run_id)}`;
        });
      }),
    );
    const runs = await this.api.listRuns();
    if (runs.length) {
      screen.appendChild(el(this.doc, "h2", undefined, "Runs"));
      const list = el(this.doc, "ul", "run-list");
      for (const runId of runs) {
        const item = el(this.doc, "li");
        const link = el(this.doc, "a", undefined, runId) as HTMLAnchorElement;
        link.href = `#/runs/${encodeURIComponent(runId)}`;
        item.appendChild(link);
        list.appendChild(item);
      }
      screen.appendChild(list);
    }
    this.root.replaceChildren(screen);
  }

  async showRun(runId: string): Promise<void> {
    const run = await this.api.getRun(runId);
    const screen = el(this.doc, "div");
    screen.appendChild(renderRunStatus(this.doc, run));

    if (run.state === "awaiting_approval") {
      const payload = await this.api.getApproval(runId);
      screen.appendChild(
        renderApprovalScreen(this.doc, payload, (decision) => {
          void this.api.postApproval(runId, decision).then(() => this.route());
        }),
      );
    }

    if (run.val_verdict) {
      screen.appendChild(renderVerdicts(this.doc, run));
    }

    // matrix view exists only when a debug stage ran
    if (run.has_matrix) {
      const matrix = await this.api.getMatrix(runId);
      const payloadSteps = await this.flowSteps(run);
      const model = buildHeatmapModel(
        matrix, payloadSteps, run.val_verdict, run.debug_verdict,
      );
      screen.appendChild(renderHeatmap(model, this.doc));
    }

    this.root.replaceChildren(screen);

    if (ACTIVE_STATES.has(run.state)) {
      this.pollTimer = setInterval(() => void this.route(), POLL_INTERVAL_MS);
    }
  }

  private async flowSteps(run: RunSummary) {
    const report = (await this.api.getReport(run.run_id)) as {
      flow?: { steps?: { ordinal: number; description: string }[] };
    };
    return (report.flow?.steps ?? []).map((step) => ({
      ordinal: step.ordinal,
      description: step.description,
      message_name: null,
      endpoints: null,
    }));
  }
}

export function bootstrap(): void {
  const doc = globalThis.document;
  const rootElement = doc?.getElementById("app");
  if (!rootElement) return;
  const params = new URLSearchParams(globalThis.location?.search ?? "");
  const token =
    params.get("token") ?? globalThis.sessionStorage?.getItem("orantest-token");
  if (token) globalThis.sessionStorage?.setItem("orantest-token", token);
  const api = new ApiClient("", token);
  new App(api, rootElement, doc).start();
}

if (typeof globalThis.document !== "undefined" && globalThis.document.getElementById("app")) {
  bootstrap();
}
