/**
 * Typed client for the session service.
 *
 * Every method round-trips to the server — the client never predicts
 * state. Non-2xx responses become ApiError carrying the server's error
 * kind and detail, so callers can branch on the published contract
 * (409 proposal_pending, 422 CutoutFailedError, ...) without string
 * matching on messages.
 */

export interface ProposalPayload {
  proposed_command: string;
  valid: boolean;
  gate_trace: number[][]; // one [generate, copy-utterance, copy-concept] row per token
  token_sources: string[];
}

export interface SnapshotUtterance {
  speaker: "user" | "assistant";
  tokens: string[];
}

export interface SnapshotImage {
  index: number;
  ref: string;
  detections: number;
}

export interface SessionSnapshot {
  session_id: string;
  utterances: SnapshotUtterance[];
  commands: string[];
  images: SnapshotImage[];
  pending: ProposalPayload | null;
}

export interface ResolveResult {
  image_id: number;
  executed_command: string;
}

export interface SearchHit {
  id: string;
  caption: string;
  tags: string[];
  distinct_terms: number;
  total_occurrences: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly kind: string,
    public readonly detail: string,
  ) {
    super(`${status} ${kind}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const kind = body?.error ?? `http_${response.status}`;
      const detail =
        typeof body?.detail === "string" ? body.detail : JSON.stringify(body?.detail ?? "");
      throw new ApiError(response.status, kind, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async health(): Promise<{ status: string; sessions: number; corpus_entries: number }> {
    return this.request("/healthz");
  }

  async createSession(): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", {});
    return body.session_id;
  }

  async getSnapshot(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/sessions/${sessionId}`);
  }

  async sendUtterance(sessionId: string, text: string): Promise<ProposalPayload> {
    return this.post(`/sessions/${sessionId}/utterance`, { text });
  }

  async accept(sessionId: string): Promise<ResolveResult> {
    return this.post(`/sessions/${sessionId}/resolve`, { action: "accept" });
  }

  async override(sessionId: string, command: string): Promise<ResolveResult> {
    return this.post(`/sessions/${sessionId}/resolve`, { action: "override", command });
  }

  async search(query: string, k = 10): Promise<{ query: string[]; hits: SearchHit[] }> {
    return this.request(`/corpus/search?q=${encodeURIComponent(query)}&k=${k}`);
  }

  /** URL of the n-th session image; the <img> tag does the fetching. */
  imageUrl(sessionId: string, n: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/images/${n}`;
  }
}
