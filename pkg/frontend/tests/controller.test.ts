import { describe, expect, it } from "vitest";

import { ConductClient, ServiceError } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { FakeService, respond, sessionView } from "./helpers.js";

function makeController(service: FakeService) {
  let keyCounter = 0;
  const renders: number[] = [];
  const client = new ConductClient("http://svc", service.fetch);
  const controller = new SessionController(
    client,
    "abc123",
    (view) => renders.push(view.seq),
    () => `key-${keyCounter++}`,
  );
  return { controller, renders };
}

describe("SessionController", () => {
  it("reuses one idempotency key for repeated submissions of the same intent", async () => {
    const service = new FakeService();
    const { controller } = makeController(service);
    await controller.refresh();
    await Promise.all([controller.submitOutcome(0, 1), controller.submitOutcome(0, 1)]);
    const keys = service.requests
      .filter((r) => r.url.includes("/outcomes"))
      .map((r) => (r.body as { idempotency_key: string }).idempotency_key);
    expect(keys).toHaveLength(2);
    expect(new Set(keys).size).toBe(1);
    expect(service.events).toBe(1); // single event recorded server-side
  });

  it("mints a fresh key for the next intent", async () => {
    const service = new FakeService();
    const { controller } = makeController(service);
    await controller.refresh();
    await controller.submitOutcome(0, 1);
    await controller.requestAssignment();
    await controller.submitOutcome(1, 0);
    const keys = service.requests
      .filter((r) => r.url.includes("/outcomes"))
      .map((r) => (r.body as { idempotency_key: string }).idempotency_key);
    expect(new Set(keys).size).toBe(2);
  });

  it("reloads authoritative state on conflict", async () => {
    const service = new FakeService();
    const { controller } = makeController(service);
    await controller.refresh();
    service.failNextWithConflict = true;
    await controller.submitOutcome(0, 1);
    const last = service.requests[service.requests.length - 1];
    expect(last.method).toBe("GET"); // resynced after the 409
    expect(controller.view?.seq).toBe(service.view.seq);
    expect(controller.stale).toBe(false); // refreshed view is authoritative
  });

  it("marks the view stale when polling sees a newer sequence", async () => {
    const service = new FakeService();
    const { controller } = makeController(service);
    await controller.refresh();
    service.view = { ...service.view, seq: service.view.seq + 5 };
    let sawStale = false;
    const client = new ConductClient("http://svc", service.fetch);
    const watcher = new SessionController(client, "abc123", (_view, stale) => {
      sawStale = sawStale || stale;
    });
    await watcher.refresh();
    service.view = { ...service.view, seq: service.view.seq + 1 };
    await watcher.poll();
    expect(sawStale).toBe(true);
  });

  it("propagates non-conflict errors", async () => {
    const client = new ConductClient("http://svc", async () =>
      respond(500, { code: "boom", message: "broken" }),
    );
    const controller = new SessionController(client, "abc123", () => undefined);
    await expect(controller.refresh()).rejects.toThrowError(ServiceError);
  });
});

describe("ConductClient", () => {
  it("sends the token header when configured", async () => {
    const service = new FakeService();
    const client = new ConductClient("http://svc", service.fetch, "sesame");
    await client.getState("abc123");
    expect(service.requests[0].headers["X-Api-Token"]).toBe("sesame");
  });

  it("wraps error bodies with status and code", async () => {
    const client = new ConductClient("http://svc", async () =>
      respond(409, { code: "conflict", message: "pending assignment" }),
    );
    try {
      await client.getState("abc123");
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(ServiceError);
      expect((error as ServiceError).isConflict).toBe(true);
      expect((error as ServiceError).code).toBe("conflict");
    }
  });

  it("parses session views", async () => {
    const view = sessionView();
    const client = new ConductClient("http://svc", async () => respond(200, view));
    expect(await client.getState("abc123")).toEqual(view);
  });
});
