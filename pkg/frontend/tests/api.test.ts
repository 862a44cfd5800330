import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("sends the bearer token on every request", async () => {
    const fetchMock = vi.fn(async () => jsonResponse([]));
    const client = new ApiClient("http://gw", "sekrit", fetchMock);
    await client.listTestCases();

    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://gw/api/v1/testcases");
    expect((init?.headers as Record<string, string>)["Authorization"]).toBe("Bearer sekrit");
  });

  it("omits the auth header without a token", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ status: "ok" }));
    const client = new ApiClient("http://gw", null, fetchMock);
    await client.health();
    const [, init] = fetchMock.mock.calls[0];
    expect((init?.headers as Record<string, string>)["Authorization"]).toBeUndefined();
  });

  it("creates runs with a generated idempotency key", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ run_id: "r1", state: "awaiting_approval" }));
    const client = new ApiClient("http://gw", null, fetchMock);
    await client.createRun("TC-06", "[]");
    await client.createRun("TC-06", "[]");

    const bodies = fetchMock.mock.calls.map(([, init]) =>
      JSON.parse(String(init?.body)));
    expect(bodies[0].tc_id).toBe("TC-06");
    expect(bodies[0].idempotency_key).toBeTruthy();
    expect(bodies[0].idempotency_key).not.toBe(bodies[1].idempotency_key);
  });

  it("posts approval decisions with operator and edits", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ run_id: "r1", state: "completed" }));
    const client = new ApiClient("http://gw", null, fetchMock);
    await client.postApproval("r1", {
      decision: "approve",
      operator: "alex",
      edited_steps: ["STEP ONE edited"],
    });

    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://gw/api/v1/runs/r1/approval");
    const body = JSON.parse(String(init?.body));
    expect(body.decision).toBe("approve");
    expect(body.operator).toBe("alex");
    expect(body.edited_steps).toEqual(["STEP ONE edited"]);
    expect(body.idempotency_key).toBeTruthy();
  });

  it("maps error responses to ApiError with the gateway detail", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse({ detail: "run r1 is not awaiting approval" }, 409));
    const client = new ApiClient("http://gw", null, fetchMock);
    await expect(client.getApproval("r1")).rejects.toMatchObject({
      status: 409,
      detail: "run r1 is not awaiting approval",
    });
    await expect(client.getApproval("r1")).rejects.toBeInstanceOf(ApiError);
  });

  it("encodes run ids in paths", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({}));
    const client = new ApiClient("http://gw", null, fetchMock);
    await client.getRun("run with spaces");
    expect(fetchMock.mock.calls[0][0]).toBe("http://gw/api/v1/runs/run%20with%20spaces");
  });
});
