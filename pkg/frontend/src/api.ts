/** Typed client for the portal HTTP/JSON API. All dialog state lives server-side. */

export interface FeedSummary {
  feed_id: string;
  url: string;
  title: string | null;
  refreshed_at: string | null;
  last_error: string | null;
}

export interface ItemView {
  index: number;
  title: string;
  phrase: string;
}

export interface ActionView {
  type: "prompt" | "announce_link" | "enter_feed" | "reject";
  node_id: string | null;
  url: string | null;
  reason: string | null;
}

export interface RankedEntry {
  item: number;
  score: number;
}

export interface InputResponse {
  action: ActionView;
  node_id: string;
  prompt: string;
  turn_count: number;
  ranked: RankedEntry[];
}

export interface SessionCreated {
  session_id: string;
  node_id: string;
  prompt: string;
}

export interface SessionView {
  session_id: string;
  feed_id: string;
  node_id: string;
  prompt: string;
  turn_count: number;
  items: ItemView[];
  history_shortcuts: Record<string, number[]>;
}

export type InputKind = "phrase" | "shortcut" | "command";

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export class PortalError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(detail);
    this.name = "PortalError";
  }
}

export class PortalClient {
  private readonly fetchFn: FetchFn;

  constructor(private readonly base: string = "", fetchFn?: FetchFn) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        /* non-JSON error body */
      }
      throw new PortalError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listFeeds(): Promise<FeedSummary[]> {
    return this.request("/feeds");
  }

  subscribe(url: string, username?: string, password?: string): Promise<{ feed_id: string }> {
    const body: Record<string, string> = { url };
    if (username) body.username = username;
    if (password) body.password = password;
    return this.post("/feeds", body);
  }

  createSession(feedId: string): Promise<SessionCreated> {
    return this.post("/sessions", { feed_id: feedId });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  postInput(sessionId: string, kind: InputKind, value: string): Promise<InputResponse> {
    return this.post(`/sessions/${sessionId}/input`, { kind, value });
  }

  history(feedId: string): Promise<{ records: unknown[]; shortcuts: Record<string, number[]> }> {
    return this.request(`/feeds/${feedId}/history`);
  }
}
