import type {
  ApiInfo,
  ChainStep,
  EventsResponse,
  RetrievedApi,
  SessionView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

/** Typed client for the session service; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, resp.status);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitSession(question: string, graphDocument: string): Promise<SessionView> {
    return this.post("/sessions", { question, graph_document: graphDocument });
  }

  listSessions(): Promise<{ sessions: SessionView[] }> {
    return this.request("/sessions");
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  confirm(id: string, chain?: ChainStep[]): Promise<SessionView> {
    return this.post(`/sessions/${id}/confirm`, chain ? { chain } : {});
  }

  execute(id: string): Promise<SessionView> {
    return this.post(`/sessions/${id}/execute`, {});
  }

  events(id: string, since: number): Promise<EventsResponse> {
    return this.request(`/sessions/${id}/events?since=${since}`);
  }

  apis(): Promise<{ apis: ApiInfo[] }> {
    return this.request("/apis");
  }

  retrieve(question: string, k: number): Promise<{ apis: RetrievedApi[] }> {
    return this.post("/apis/retrieve", { question, k });
  }

  suggest(graphDocument: string): Promise<{ questions: string[] }> {
    return this.post("/suggest", { graph_document: graphDocument });
  }
}
