// Wire types mirrored from the service's JSON responses.

export type SessionStatus = "proposed" | "confirmed" | "executing" | "done" | "failed";

export interface ChainStep {
  api: string;
  args: Record<string, string>;
}

export interface SessionView {
  id: string;
  question: string;
  status: SessionStatus;
  graph_name: string;
  n_nodes: number;
  n_edges: number;
  chain: ChainStep[];
  seed: number;
  n_events: number;
  final_payload: string | null;
}

export interface EventRecord {
  type: "step-event";
  seq: number;
  step_index: number;
  kind: "started" | "finished" | "error" | "needs_confirmation";
  payload: string;
  ts: number;
}

export interface EventsResponse {
  status: SessionStatus;
  events: EventRecord[];
}

export interface ApiInfo {
  id: string;
  description: string;
  input_kind: string;
  output_kind: string;
}

export interface RetrievedApi {
  id: string;
  score: number;
}
