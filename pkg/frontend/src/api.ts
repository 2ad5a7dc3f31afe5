/**
 * Typed client for the session service.
 *
 * Every method maps to one endpoint and returns the parsed body as-is;
 * nothing is recomputed or reshaped beyond JSON decoding, so numbers
 * shown in the UI are the service's own. Non-2xx responses become
 * ServiceError with the server's detail string.
 */

export interface TemplateVertex {
  id: number;
  label: number;
}

export interface TemplateDoc {
  vertices: TemplateVertex[];
  edges: [number, number][];
}

export interface RevisionEcho {
  op: string;
  edge: [number, number];
  seconds: number;
}

/** Body of session-create and edge-edit responses. */
export interface SessionStats {
  vertices: number;
  edges: number;
  candidates: number;
  revision: RevisionEcho;
  cache: { pass_hits: number; fail_hits: number; misses: number };
}

export interface StatsPayload {
  schema_version: number;
  stats: SessionStats;
}

export interface CreatePayload extends StatsPayload {
  session_id: string;
}

export interface ResultPayload {
  schema_version: number;
  vertices: number;
  edges: number;
  mapping_count: number;
  embedding_count: number;
  automorphism_order: number;
  timings: [string, number][];
  sample_matches: number[][];
}

export interface PhaseEvent {
  revision: number;
  op: string;
  phase: string;
  name: string;
  seconds: number;
  report: Record<string, unknown>;
}

export interface EventsPayload {
  schema_version: number;
  next: number;
  events: PhaseEvent[];
}

export interface ExploreVariant {
  removed: [number, number][];
  vertices: number;
  edges: number;
  matched: boolean;
}

export interface ExplorePayload {
  schema_version: number;
  found_k: number | null;
  levels: { k: number; matched_variants: number; variants: ExploreVariant[] }[];
  union_vertices: number[];
  union_edges: [number, number][];
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service ${status}: ${detail}`);
    this.name = "ServiceError";
  }
}

/** The subset of fetch the client needs; injectable for tests. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

const SCHEMA_VERSION = 1;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const doc = (await resp.json()) as { detail?: unknown };
        if (doc && doc.detail !== undefined) {
          // validation failures arrive as structured lists, not strings
          detail =
            typeof doc.detail === "string" ? doc.detail : JSON.stringify(doc.detail);
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(template: TemplateDoc): Promise<CreatePayload> {
    return this.call("POST", "/session", { schema_version: SCHEMA_VERSION, template });
  }

  addEdge(sessionId: string, edge: [number, number]): Promise<StatsPayload> {
    return this.call("POST", `/session/${sessionId}/edge`, {
      schema_version: SCHEMA_VERSION,
      edge,
    });
  }

  removeEdge(sessionId: string, edge: [number, number]): Promise<StatsPayload> {
    return this.call("DELETE", `/session/${sessionId}/edge`, {
      schema_version: SCHEMA_VERSION,
      edge,
    });
  }

  result(sessionId: string, samples?: number): Promise<ResultPayload> {
    const query = samples === undefined ? "" : `?samples=${samples}`;
    return this.call("GET", `/session/${sessionId}/result${query}`);
  }

  templateEcho(sessionId: string): Promise<{ schema_version: number; template: TemplateDoc }> {
    return this.call("GET", `/session/${sessionId}/template`);
  }

  events(sessionId: string, after = 0): Promise<EventsPayload> {
    return this.call("GET", `/session/${sessionId}/events?after=${after}`);
  }

  explore(template: TemplateDoc, maxK: number): Promise<ExplorePayload> {
    return this.call("POST", "/explore", {
      schema_version: SCHEMA_VERSION,
      template,
      max_k: maxK,
    });
  }
}
