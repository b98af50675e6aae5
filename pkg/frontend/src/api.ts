/** Typed client for the /v1 prediction service.
 *
 * Every number shown anywhere in the UI originates from these payloads;
 * the client performs no similarity computation of its own.
 */

export interface DiagnosisIn {
  code: string;
  seq: number;
}

export interface LogInfo {
  id: string;
  n_cases: number;
  diagnosis_taxonomy: string;
  procedure_taxonomy: string;
}

export interface LogStats {
  id: string;
  n_traces: number;
  mean_len: number;
  std_len: number;
  n_variants: number;
  n_unique_events: number;
  n_unique_diagnoses: number;
}

export interface CodeInfo {
  code: string;
  description: string;
  ancestors: string[];
  children: string[];
  ic: number;
}

/** One matched pair from the bipartite matching, with its edge weight
 * factors: weight = similarity * order_weight (server-computed). */
export interface MatchedEdge {
  query_code: string;
  query_pos: number;
  case_code: string;
  case_pos: number;
  similarity: number;
  order_weight: number;
  weight: number;
}

export interface Supporter {
  case_id: string;
  sim_trace: number;
  sim_list: number;
  sim_cf: number;
  alpha: [number, number];
  admit_time: string;
  list_edges: MatchedEdge[];
  cf_edges: MatchedEdge[];
}

export interface Candidate {
  activity: string;
  score: number;
  description: string;
  supporters: Supporter[];
}

export interface Prediction {
  query_fingerprint: string;
  log_id: string;
  mode: string;
  n: number;
  variant: string;
  candidates: Candidate[];
}

export interface PredictRequest {
  log_id: string;
  diagnoses: DiagnosisIn[];
  events: string[];
  n?: number;
  variant?: string;
  mode?: string;
  explain_top?: number;
}

/** Non-2xx response, keeping the server's JSON body for inline display. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: unknown,
  ) {
    super(describeError(status, payload));
    this.name = "ApiError";
  }
}

/** Human-readable line built from the server's error body. */
export function describeError(status: number, payload: unknown): string {
  if (payload && typeof payload === "object") {
    const body = payload as Record<string, unknown>;
    const kind = typeof body.error === "string" ? body.error : `http ${status}`;
    const parts = [kind];
    if (typeof body.code === "string") parts.push(body.code);
    if (typeof body.detail === "string") parts.push(body.detail);
    if (typeof body.log_id === "string") parts.push(body.log_id);
    return parts.join(": ");
  }
  return `http ${status}`;
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) throw new ApiError(resp.status, body);
    return body as T;
  }

  listLogs(): Promise<LogInfo[]> {
    return this.request("/v1/logs");
  }

  logStats(logId: string): Promise<LogStats> {
    return this.request(`/v1/logs/${encodeURIComponent(logId)}/stats`);
  }

  codeInfo(taxId: string, code: string): Promise<CodeInfo> {
    return this.request(
      `/v1/taxonomy/${encodeURIComponent(taxId)}/code/${encodeURIComponent(code)}`,
    );
  }

  predict(req: PredictRequest): Promise<Prediction> {
    return this.request("/v1/predict", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
