// Typed client for the ranking service. Scores arrive as decimal strings
// and are kept as strings everywhere: the UI renders them verbatim and
// only parses copies for chart geometry, so a what-if with no overrides
// can be verified against the stored run by plain string comparison.

export interface Meta {
  service: string;
  backend: string;
}

export interface RunSummary {
  run_id: string;
  created_at: string;
  config_hash: string;
  granularities: string[];
  protocols: string[];
  date_range: { start: string; end: string } | null;
}

export interface ConsistencyReport {
  n: number;
  lambda_max: number;
  ci: number;
  ri: number;
  cr: number;
  pass: boolean;
}

export interface ScoresResponse {
  run_id: string;
  granularity: string;
  dates: string[];
  protocols: string[];
  flags: Record<string, string[][]>;
  warnings: string[][];
  consistency: Record<string, ConsistencyReport>[];
  all_missing: string[][];
  scores?: Record<string, (string | null)[]>;
  ranks?: Record<string, (number | null)[]>;
}

export interface WhatIfResponse {
  run_id: string;
  granularity: string;
  dates: string[];
  protocols: string[];
  scores: Record<string, (string | null)[]>;
  ranks: Record<string, (number | null)[]>;
  weights: {
    criteria: Record<string, string>;
    indicators: Record<string, Record<string, string>>;
  };
  consistency: Record<string, ConsistencyReport>;
  warnings: string[];
}

export interface ConsistencyResponse extends ConsistencyReport {
  weights: string[];
  residuals: string[];
  converged: boolean;
}

export interface WhatIfRequest {
  granularity?: string;
  criterion_weights?: Record<string, number>;
  indicator_weights?: Record<string, number>;
  criteria_judgment?: number[][] | null;
  indicator_judgments?: Record<string, number[][] | null>;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const err = body && typeof body === "object" ? (body as any).error : null;
    throw new ApiError(
      err?.code ?? "http_error",
      err?.message ?? `request failed with status ${response.status}`,
      response.status,
    );
  }
  return body as T;
}

function post<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export const api = {
  meta: () => request<Meta>("/api/meta"),
  runs: () => request<RunSummary[]>("/api/runs"),
  scores: (runId: string, opts: { granularity?: string; ordinate?: string } = {}) => {
    const params = new URLSearchParams();
    if (opts.granularity) params.set("granularity", opts.granularity);
    if (opts.ordinate) params.set("ordinate", opts.ordinate);
    const query = params.toString();
    return request<ScoresResponse>(
      `/api/runs/${encodeURIComponent(runId)}/scores${query ? `?${query}` : ""}`,
    );
  },
  whatIf: (runId: string, body: WhatIfRequest) =>
    post<WhatIfResponse>(`/api/runs/${encodeURIComponent(runId)}/whatif`, body),
  consistency: (matrix: number[][]) =>
    post<ConsistencyResponse>("/api/consistency", { matrix }),
};

// True when a what-if response carries exactly the stored scores: every
// protocol present in both, every cell the same string (or both null).
export function sameScores(
  stored: Record<string, (string | null)[]> | undefined,
  whatIf: Record<string, (string | null)[]>,
): boolean {
  if (!stored) return false;
  const a = Object.keys(stored).sort();
  const b = Object.keys(whatIf).sort();
  if (a.length !== b.length || a.some((k, i) => k !== b[i])) return false;
  return a.every((p) => {
    const left = stored[p]!;
    const right = whatIf[p]!;
    return (
      left.length === right.length && left.every((v, i) => v === right[i])
    );
  });
}
