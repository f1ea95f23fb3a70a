/** Wire types and client for the engine's /chat and /health endpoints. */

export interface ContextCard {
  text: string;
  score: number;
  store_id: string;
}

export interface ChatResponse {
  answer: string;
  sources: string[];
  contexts: ContextCard[];
  model: string;
  latency_ms: number;
  ungrounded?: boolean;
}

export interface HealthResponse {
  status: string;
  stores: Array<{ store_id: string; source_kind: string; dim: number; count: number }>;
}

export interface ApiError {
  error: { code: string; message: string };
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export const DEFAULT_TIMEOUT_MS = 60_000;

export class ChatApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

export class ChatApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly timeoutMs: number;

  constructor(baseUrl = "", fetchFn?: FetchLike, timeoutMs = DEFAULT_TIMEOUT_MS) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.timeoutMs = timeoutMs;
  }

  async chat(query: string): Promise<ChatResponse> {
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), this.timeoutMs);
    try {
      let response: Response;
      try {
        response = await this.fetchFn(`${this.baseUrl}/chat`, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify({ query }),
          signal: controller.signal,
        });
      } catch (err) {
        if (controller.signal.aborted) {
          throw new ChatApiError(0, "timeout", `no response after ${this.timeoutMs / 1000}s`);
        }
        throw new ChatApiError(0, "network", String(err));
      }
      if (!response.ok) {
        let code = `http_${response.status}`;
        let message = response.statusText || `server returned ${response.status}`;
        try {
          const payload = (await response.json()) as ApiError;
          if (payload?.error) {
            code = payload.error.code;
            message = payload.error.message;
          }
        } catch {
          // non-JSON error body: keep the status-derived message
        }
        throw new ChatApiError(response.status, code, message);
      }
      return (await response.json()) as ChatResponse;
    } finally {
      clearTimeout(timer);
    }
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/health`, { method: "GET" });
    if (!response.ok) {
      throw new ChatApiError(response.status, `http_${response.status}`, "health check failed");
    }
    return (await response.json()) as HealthResponse;
  }
}
