import type {
  CommitResult,
  Delta,
  ExampleSample,
  Meta,
  PlaygroundState,
  PredicateInfo,
  Progress,
  Rule,
  RuleList,
} from "./types.js";
import type { TableControls } from "./state.js";
import { controlsToApiQuery } from "./state.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function throwFrom(resp: Response): Promise<never> {
  let code = "http_error";
  let message = `request failed with status ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "object" && body.detail !== null) {
      code = body.detail.code ?? code;
      message = body.detail.message ?? message;
    } else if (typeof body?.detail === "string") {
      message = body.detail;
    }
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(resp.status, code, message);
}

/** Thin typed wrapper over the HTTP API. The fetch function is injectable
 * so tests can stub the server. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.base + path);
    if (!resp.ok) await throwFrom(resp);
    return resp.json() as Promise<T>;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) await throwFrom(resp);
    return resp.json() as Promise<T>;
  }

  meta(): Promise<Meta> {
    return this.get("/meta");
  }

  predicates(): Promise<PredicateInfo[]> {
    return this.get("/predicates");
  }

  rules(controls: TableControls): Promise<RuleList> {
    const query = controlsToApiQuery(controls);
    return this.get(`/rules${query ? "?" + query : ""}`);
  }

  rule(id: number): Promise<Rule> {
    return this.get(`/rules/${id}`);
  }

  examples(id: number, seed = 0): Promise<ExampleSample> {
    return this.get(`/rules/${id}/examples?seed=${seed}`);
  }

  delta(id: number): Promise<Delta> {
    return this.get(`/rules/${id}/delta`);
  }

  approve(id: number): Promise<Progress> {
    return this.post(`/rules/${id}/approve`);
  }

  disapprove(id: number): Promise<Progress> {
    return this.post(`/rules/${id}/disapprove`);
  }

  unmark(id: number): Promise<Progress> {
    return this.post(`/rules/${id}/unmark`);
  }

  progress(): Promise<Progress> {
    return this.get("/progress");
  }

  openPlayground(expressionId: number): Promise<PlaygroundState> {
    return this.post("/playground", { expression_id: expressionId });
  }

  editPlayground(pid: string, op: "add" | "drop", predicate: number | string): Promise<PlaygroundState> {
    return this.post(`/playground/${pid}/edit`, { op, predicate });
  }

  commitPlayground(pid: string): Promise<CommitResult> {
    return this.post(`/playground/${pid}/commit`);
  }

  saveSession(path: string): Promise<{ ok: boolean; path: string }> {
    return this.post("/session/save", { path });
  }

  loadSession(path: string): Promise<Progress> {
    return this.post("/session/load", { path });
  }
}
