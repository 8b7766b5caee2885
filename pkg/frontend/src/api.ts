// Typed client for the session service. All knowledge of partitions lives
// server-side; this file only moves JSON.

export interface Item {
  id: string;
  payload: string;
}

export type SessionStatus = "active" | "repairing" | "resolved" | "escalated";

export interface SessionState {
  id: string;
  status: SessionStatus;
  strategy: string;
  items: Item[];
  answered: number;
  blocks: number[][];
  labels: Record<string, string> | null;
  expected_queries: number | null;
  plan: { r: number; r_prime: number | null } | null;
}

export interface PendingQuery {
  u: number;
  v: number;
  u_item: Item;
  v_item: Item;
  repair: boolean;
}

export interface NextResponse {
  status: SessionStatus;
  query: PendingQuery | null;
  wait?: boolean;
}

export interface AnswerDelta {
  status: SessionStatus;
  merged: boolean;
  contradiction: boolean;
  blocks: number[][];
  repair_query?: PendingQuery;
}

export interface LogEntry {
  t: number;
  u: number;
  v: number;
  positive: boolean;
  repair?: boolean;
}

export interface ExportBundle {
  id: string;
  labels: Record<string, string>;
  blocks: string[][];
  log: LogEntry[];
}

export interface CreateRequest {
  items: (string | Item)[];
  strategy?: string;
  plan?: { r: number; r_prime?: number | null } | null;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface SessionApi {
  createSession(req: CreateRequest): Promise<SessionState>;
  getSession(id: string): Promise<SessionState>;
  nextQuery(id: string, annotator: string): Promise<NextResponse>;
  submitAnswer(
    id: string,
    u: number,
    v: number,
    positive: boolean,
  ): Promise<AnswerDelta>;
  setLabels(id: string, labels: Record<string, string>): Promise<ExportBundle>;
  fetchExport(id: string): Promise<ExportBundle>;
}

export class ApiClient implements SessionApi {
  constructor(
    private readonly base: string,
    // bound wrapper: a bare `fetch` reference breaks in browsers
    private readonly fetchImpl: typeof fetch = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new ApiError("network", String(err), 0);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // some proxies return empty bodies on errors; fall through
    }
    if (!response.ok) {
      const e = body as { code?: string; message?: string } | null;
      throw new ApiError(
        e?.code ?? "http_error",
        e?.message ?? `request failed with ${response.status}`,
        response.status,
      );
    }
    return body as T;
  }

  createSession(req: CreateRequest): Promise<SessionState> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(req),
    });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}`);
  }

  nextQuery(id: string, annotator: string): Promise<NextResponse> {
    const token = encodeURIComponent(annotator);
    return this.request(`/sessions/${id}/next?annotator=${token}`);
  }

  submitAnswer(
    id: string,
    u: number,
    v: number,
    positive: boolean,
  ): Promise<AnswerDelta> {
    return this.request(`/sessions/${id}/answers`, {
      method: "POST",
      body: JSON.stringify({ u, v, positive }),
    });
  }

  setLabels(
    id: string,
    labels: Record<string, string>,
  ): Promise<ExportBundle> {
    return this.request(`/sessions/${id}/labels`, {
      method: "POST",
      body: JSON.stringify({ labels }),
    });
  }

  fetchExport(id: string): Promise<ExportBundle> {
    return this.request(`/sessions/${id}/export`);
  }
}
