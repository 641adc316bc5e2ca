import { describe, expect, it } from "vitest";

import { MonitorModel } from "../src/monitor.js";
import type { ChainStep, EventRecord } from "../src/types.js";

const CHAIN: ChainStep[] = [
  { api: "load_graph", args: {} },
  { api: "node_count", args: {} },
  { api: "report", args: {} },
];

function event(seq: number, step: number, kind: EventRecord["kind"], payload = ""): EventRecord {
  return { type: "step-event", seq, step_index: step, kind, payload, ts: 0 };
}

describe("MonitorModel", () => {
  it("walks rows pending -> running -> done", () => {
    const monitor = new MonitorModel(CHAIN);
    expect(monitor.rows.map((r) => r.state)).toEqual(["pending", "pending", "pending"]);
    monitor.apply(event(1, 0, "started"));
    expect(monitor.rows[0].state).toBe("running");
    monitor.apply(event(2, 0, "finished", "3"));
    expect(monitor.rows[0].state).toBe("done");
    expect(monitor.rows[0].payload).toBe("3");
    expect(monitor.rows[1].state).toBe("pending");
  });

  it("marks later rows skipped on error", () => {
    const monitor = new MonitorModel(CHAIN);
    monitor.apply(event(1, 0, "started"));
    monitor.apply(event(2, 0, "finished"));
    monitor.apply(event(3, 1, "started"));
    monitor.apply(event(4, 1, "error", "boom"));
    expect(monitor.rows.map((r) => r.state)).toEqual(["done", "error", "skipped"]);
  });

  it("ignores duplicate sequence numbers", () => {
    const monitor = new MonitorModel(CHAIN);
    monitor.apply(event(1, 0, "started"));
    monitor.apply(event(2, 0, "finished"));
    monitor.apply(event(2, 0, "finished"));
    monitor.apply(event(1, 0, "started"));
    expect(monitor.eventCount).toBe(2);
    expect(monitor.rows[0].state).toBe("done");
  });

  it("finish(failed) skips rows that never ran", () => {
    const monitor = new MonitorModel(CHAIN);
    monitor.apply(event(1, 0, "started"));
    monitor.finish("failed");
    expect(monitor.rows.map((r) => r.state)).toEqual(["running", "skipped", "skipped"]);
  });
});
