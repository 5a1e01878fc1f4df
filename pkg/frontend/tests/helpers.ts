/** Shared fixtures: canned session views and a tiny in-memory fake service. */

import type { ArmView, FetchLike, SessionView } from "../src/api.js";

export function armView(overrides: Partial<ArmView> & { index: number }): ArmView {
  return {
    n: 0,
    counts: [0, 0],
    posterior_mode: [0.25, 0.75],
    delta: 0.1,
    delta_final: 0.1,
    admissible: true,
    selection_probability: null,
    safety_threshold: 0.65,
    overdose_probability: 0.2,
    ...overrides,
  };
}

export function sessionView(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "abc123",
    status: "in_progress",
    seq: 3,
    patients_treated: 2,
    max_patients: 20,
    rule: "rule2",
    kappa: 0.5,
    gamma: [0.25, 0.75],
    pending_assignment: null,
    recommendation: null,
    recommended: false,
    arms: [
      armView({ index: 0, n: 2, counts: [1, 1], delta: 0.2, delta_final: 0.2 }),
      armView({ index: 1, delta: 0.05, delta_final: 0.05 }),
      armView({ index: 2, delta: 0.4, delta_final: 0.4, admissible: false }),
    ],
    next_preview: { kind: "assign", arm: 1, probabilities: null },
    hypothetical: false,
    ...overrides,
  };
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
  headers: Record<string, string>;
}

/** Minimal fake of the conduct endpoints with server-side idempotency. */
export class FakeService {
  requests: RecordedRequest[] = [];
  events = 0;
  seenKeys = new Set<string>();
  view: SessionView = sessionView({ pending_assignment: 0, seq: 4 });
  failNextWithConflict = false;

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    let body: unknown = null;
    if (init?.body) body = JSON.parse(init.body as string);
    this.requests.push({
      url,
      method,
      body,
      headers: (init?.headers as Record<string, string>) ?? {},
    });
    if (this.failNextWithConflict) {
      this.failNextWithConflict = false;
      return respond(409, { code: "conflict", message: "stale" });
    }
    if (url.includes("/outcomes")) {
      const key = (body as { idempotency_key: string }).idempotency_key;
      if (!this.seenKeys.has(key)) {
        this.seenKeys.add(key);
        this.events += 1;
        this.view = { ...this.view, seq: this.view.seq + 1, pending_assignment: null };
      }
      return respond(200, this.view);
    }
    if (url.includes("/assignments")) {
      this.events += 1;
      this.view = { ...this.view, seq: this.view.seq + 1, pending_assignment: 1 };
      return respond(200, { kind: "assign", arm: 1, view: this.view });
    }
    if (url.includes("/whatif")) {
      return respond(200, { ...this.view, hypothetical: true });
    }
    return respond(200, this.view);
  };
}

export function respond(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
