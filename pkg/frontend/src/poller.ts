import type { ApiClient } from "./api.js";
import type { EventRecord, SessionStatus } from "./types.js";

export interface PollerOptions {
  intervalMs?: number;
  onEvent: (event: EventRecord) => void;
  onStatus?: (status: SessionStatus) => void;
  onConnectionError?: (err: unknown) => void;
}

const TERMINAL: SessionStatus[] = ["done", "failed"];

/**
 * Polls the events endpoint with a since-cursor until the session reaches a
 * terminal status.  The cursor only advances on contiguous sequence numbers,
 * so duplicates (e.g. after a reconnect) are dropped and a gap forces a
 * re-fetch from the last good cursor instead of rendering out of order.
 */
export class EventPoller {
  private cursor = 0;
  private stopped = false;

  constructor(
    private readonly client: ApiClient,
    private readonly sessionId: string,
    private readonly opts: PollerOptions,
  ) {}

  get since(): number {
    return this.cursor;
  }

  stop(): void {
    this.stopped = true;
  }

  /** One poll step: fetch events after the cursor and apply them. */
  async pollOnce(): Promise<SessionStatus | null> {
    let response;
    try {
      response = await this.client.events(this.sessionId, this.cursor);
    } catch (err) {
      this.opts.onConnectionError?.(err);
      return null; // retry from the same cursor on the next tick
    }
    for (const event of response.events) {
      if (event.seq <= this.cursor) continue; // duplicate
      if (event.seq !== this.cursor + 1) break; // gap: refetch next tick
      this.cursor = event.seq;
      this.opts.onEvent(event);
    }
    this.opts.onStatus?.(response.status);
    return response.status;
  }

  /** Poll until terminal status or stop(); resolves to the final status. */
  async run(): Promise<SessionStatus | null> {
    const interval = this.opts.intervalMs ?? 250;
    while (!this.stopped) {
      const status = await this.pollOnce();
      if (status && TERMINAL.includes(status)) return status;
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
    return null;
  }
}
