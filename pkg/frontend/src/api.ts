// Typed client for the gateway API. All dashboard traffic goes through here:
// bearer auth on every call, idempotency keys on mutations so a retried
// approval can never double-apply.

import type {
  ApprovalPayload,
  MatrixExport,
  RunSummary,
  TestCase,
  VerdictsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export interface ApprovalDecision {
  decision: "approve" | "reject";
  operator: string;
  edited_steps?: string[];
  idempotency_key?: string;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function newIdempotencyKey(): string {
  if (globalThis.crypto?.randomUUID) {
    return globalThis.crypto.randomUUID();
  }
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
    private readonly fetchImpl: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      ...(init.headers as Record<string, string> | undefined),
    };
    if (init.body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
      ...init,
      headers,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  listTestCases(): Promise<TestCase[]> {
    return this.request("/testcases");
  }

  listRuns(): Promise<string[]> {
    return this.request("/runs");
  }

  createRun(tcId: string, logContent: string, runId?: string): Promise<RunSummary> {
    return this.request("/runs", {
      method: "POST",
      body: JSON.stringify({
        tc_id: tcId,
        log_content: logContent,
        run_id: runId ?? null,
        idempotency_key: newIdempotencyKey(),
      }),
    });
  }

  getRun(runId: string): Promise<RunSummary> {
    return this.request(`/runs/${encodeURIComponent(runId)}`);
  }

  getApproval(runId: string): Promise<ApprovalPayload> {
    return this.request(`/runs/${encodeURIComponent(runId)}/approval`);
  }

  postApproval(runId: string, decision: ApprovalDecision): Promise<RunSummary> {
    const body = { idempotency_key: newIdempotencyKey(), ...decision };
    return this.request(`/runs/${encodeURIComponent(runId)}/approval`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getVerdicts(runId: string): Promise<VerdictsResponse> {
    return this.request(`/runs/${encodeURIComponent(runId)}/verdicts`);
  }

  getMatrix(runId: string): Promise<MatrixExport> {
    return this.request(`/runs/${encodeURIComponent(runId)}/matrix`);
  }

  getReport(runId: string): Promise<Record<string, unknown>> {
    return this.request(`/runs/${encodeURIComponent(runId)}/report`);
  }
}
