import type {
  ActionResult,
  CreateSessionResponse,
  DmAction,
  RoundPayload,
  SummaryPayload,
} from "./types.js";

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponse>;

/** Server answered with an error status (the detail is its message). */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      const detail =
        typeof payload?.detail === "string" ? payload.detail : `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  createSession(playerAlias: string): Promise<CreateSessionResponse> {
    return this.request("POST", "/sessions", { player_alias: playerAlias });
  }

  getRound(sessionId: string): Promise<RoundPayload> {
    return this.request("GET", `/sessions/${sessionId}/round`);
  }

  postAction(sessionId: string, action: DmAction): Promise<ActionResult> {
    return this.request("POST", `/sessions/${sessionId}/action`, { action });
  }

  getSummary(sessionId: string): Promise<SummaryPayload> {
    return this.request("GET", `/sessions/${sessionId}/summary`);
  }
}
