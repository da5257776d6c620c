/** Typed fetch client for the elicitation session API. */

import type {
  AlphabetObj,
  CreateSessionResponse,
  ResultResponse,
  SessionView,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  health(): Promise<{ ok: boolean }> {
    return this.request("/health");
  }

  createSession(
    alphabet: AlphabetObj,
    epsilon: number,
    budget: number | null = null,
  ): Promise<CreateSessionResponse> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ alphabet, epsilon, budget }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  submitAnswer(id: string, verdict: Verdict): Promise<SessionView> {
    return this.request(`/sessions/${id}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ verdict }),
    });
  }

  getResult(id: string): Promise<ResultResponse> {
    return this.request(`/sessions/${id}/result`);
  }
}
