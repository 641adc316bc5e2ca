import type { ChainStep, EventRecord, SessionStatus } from "./types.js";

export type RowState = "pending" | "running" | "done" | "error" | "skipped";

export interface StepRow {
  index: number;
  api: string;
  state: RowState;
  payload: string;
}

/**
 * Execution timeline: one row per chain step, driven by step events.
 * Events must be applied in sequence order (the poller guarantees that);
 * applying the same seq twice is a no-op so reconnects cannot duplicate.
 */
export class MonitorModel {
  readonly rows: StepRow[];
  private appliedSeqs = new Set<number>();
  private failed = false;

  constructor(chain: ChainStep[]) {
    this.rows = chain.map((step, index) => ({
      index,
      api: step.api,
      state: "pending",
      payload: "",
    }));
  }

  apply(event: EventRecord): void {
    if (this.appliedSeqs.has(event.seq)) return;
    this.appliedSeqs.add(event.seq);
    const row = this.rows[event.step_index];
    if (!row) return;
    switch (event.kind) {
      case "started":
        row.state = "running";
        break;
      case "finished":
        row.state = "done";
        row.payload = event.payload;
        break;
      case "error":
        row.state = "error";
        row.payload = event.payload;
        this.failed = true;
        for (const later of this.rows.slice(event.step_index + 1)) {
          later.state = "skipped";
        }
        break;
      case "needs_confirmation":
        row.payload = event.payload;
        break;
    }
  }

  finish(status: SessionStatus): void {
    if (status === "failed" && !this.failed) {
      for (const row of this.rows) {
        if (row.state === "pending") row.state = "skipped";
      }
    }
  }

  get eventCount(): number {
    return this.appliedSeqs.size;
  }
}
