/** Thin typed client over the service's JSON-over-HTTP API.
 *
 * Every method maps to exactly one endpoint; no state is kept here.  The
 * fetch implementation is injectable so tests can record and fake traffic.
 */

import type {
  CandidatesResponse,
  CreateSessionResponse,
  HealthResponse,
  RenderJsonResponse,
  ResketchResponse,
  SelectResponse,
  UserBox,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
}>;

/** A non-2xx response, carrying the server's error message and hint. */
export class ApiServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly hint?: string,
  ) {
    super(message);
    this.name = "ApiServiceError";
  }
}

async function parseError(status: number, body: string): Promise<never> {
  let message = body || `HTTP ${status}`;
  let hint: string | undefined;
  try {
    const doc = JSON.parse(body) as { error?: string; hint?: string };
    if (typeof doc.error === "string") message = doc.error;
    if (typeof doc.hint === "string") hint = doc.hint;
  } catch {
    // non-JSON error body: keep the raw text
  }
  throw new ApiServiceError(status, message, hint);
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn =
      fetchFn ?? (globalThis.fetch.bind(globalThis) as unknown as FetchLike);
  }

  private async requestJson<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers:
        body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) await parseError(response.status, text);
    return JSON.parse(text) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    const text = await response.text();
    if (!response.ok) await parseError(response.status, text);
    return text;
  }

  healthz(): Promise<HealthResponse> {
    return this.requestJson("GET", "/healthz");
  }

  createSession(
    description: string,
    requestId?: string,
  ): Promise<CreateSessionResponse> {
    return this.requestJson("POST", "/sessions", {
      description,
      request_id: requestId ?? null,
    });
  }

  getCandidates(sessionId: string, k = 4): Promise<CandidatesResponse> {
    return this.requestJson(
      "GET",
      `/sessions/${sessionId}/candidates?k=${k}`,
    );
  }

  autocomplete(
    sessionId: string,
    box: UserBox,
    k = 4,
    requestId?: string,
  ): Promise<CandidatesResponse> {
    return this.requestJson("POST", `/sessions/${sessionId}/autocomplete`, {
      box,
      k,
      request_id: requestId ?? null,
    });
  }

  select(
    sessionId: string,
    candidateId: string,
    requestId?: string,
  ): Promise<SelectResponse> {
    return this.requestJson("POST", `/sessions/${sessionId}/select`, {
      candidate_id: candidateId,
      request_id: requestId ?? null,
    });
  }

  resketch(
    sessionId: string,
    objectIndex: number,
    requestId?: string,
  ): Promise<ResketchResponse> {
    return this.requestJson("POST", `/sessions/${sessionId}/resketch`, {
      object_index: objectIndex,
      request_id: requestId ?? null,
    });
  }

  renderSvg(sessionId: string): Promise<string> {
    return this.requestText(`/sessions/${sessionId}/render`);
  }

  renderJson(sessionId: string): Promise<RenderJsonResponse> {
    return this.requestJson("GET", `/sessions/${sessionId}/render.json`);
  }

  replaySvg(sessionId: string): Promise<string> {
    return this.requestText(`/sessions/${sessionId}/replay`);
  }
}
