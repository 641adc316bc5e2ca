import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { EventPoller } from "../src/poller.js";
import type { EventRecord, EventsResponse, SessionStatus } from "../src/types.js";

function event(seq: number, kind: EventRecord["kind"] = "started"): EventRecord {
  return { type: "step-event", seq, step_index: 0, kind, payload: `p${seq}`, ts: 0 };
}

/** Client whose events() returns scripted responses (or throws). */
function scriptedClient(script: Array<EventsResponse | Error>): ApiClient {
  let call = 0;
  const fetchImpl = async (url: string): Promise<Response> => {
    if (!url.includes("/events")) throw new Error(`unexpected url ${url}`);
    const entry = script[Math.min(call, script.length - 1)];
    call += 1;
    if (entry instanceof Error) throw entry;
    return new Response(JSON.stringify(entry), { status: 200 });
  };
  return new ApiClient("", fetchImpl);
}

describe("EventPoller", () => {
  it("applies events in order and advances the cursor", async () => {
    const seen: number[] = [];
    const client = scriptedClient([
      { status: "executing", events: [event(1), event(2)] },
      { status: "done", events: [event(3)] },
    ]);
    const poller = new EventPoller(client, "s1", {
      intervalMs: 1,
      onEvent: (e) => seen.push(e.seq),
    });
    const status = await poller.run();
    expect(status).toBe("done");
    expect(seen).toEqual([1, 2, 3]);
    expect(poller.since).toBe(3);
  });

  it("drops duplicates after a reconnect", async () => {
    const seen: number[] = [];
    const client = scriptedClient([
      { status: "executing", events: [event(1), event(2)] },
      // overlap: server resends from the start
      { status: "done", events: [event(1), event(2), event(3), event(4)] },
    ]);
    const poller = new EventPoller(client, "s1", {
      intervalMs: 1,
      onEvent: (e) => seen.push(e.seq),
    });
    await poller.run();
    expect(seen).toEqual([1, 2, 3, 4]);
  });

  it("does not apply past a gap", async () => {
    const seen: number[] = [];
    const client = scriptedClient([
      { status: "executing", events: [event(1)] },
      { status: "executing", events: [event(3), event(4)] }, // missing 2
      { status: "done", events: [event(2), event(3), event(4)] },
    ]);
    const poller = new EventPoller(client, "s1", {
      intervalMs: 1,
      onEvent: (e) => seen.push(e.seq),
    });
    await poller.run();
    expect(seen).toEqual([1, 2, 3, 4]);
  });

  it("retries from the same cursor after a connection error", async () => {
    const seen: number[] = [];
    const errors: unknown[] = [];
    const client = scriptedClient([
      { status: "executing", events: [event(1)] },
      new TypeError("network down"),
      { status: "done", events: [event(1), event(2)] },
    ]);
    const poller = new EventPoller(client, "s1", {
      intervalMs: 1,
      onEvent: (e) => seen.push(e.seq),
      onConnectionError: (e) => errors.push(e),
    });
    const status = await poller.run();
    expect(status).toBe("done");
    expect(errors).toHaveLength(1);
    expect(seen).toEqual([1, 2]);
  });

  it("stop() ends the loop", async () => {
    const client = scriptedClient([{ status: "executing" as SessionStatus, events: [] }]);
    const poller = new EventPoller(client, "s1", { intervalMs: 1, onEvent: () => {} });
    const running = poller.run();
    poller.stop();
    expect(await running).toBeNull();
  });
});
