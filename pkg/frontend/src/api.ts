/**
 * Typed fetch client for the session service.
 *
 * Consumes exactly the documented HTTP+JSON endpoints; every error body is
 * `{ "error": code, "detail": text }` and is surfaced as an ApiError so the
 * UI can distinguish validation problems from network failures.
 */

export interface RubricQuestionView {
  id: string;
  text: string;
  is_overall_success: boolean;
}

export interface AssignmentView {
  rollout_index: number;
  blinded_label: string;
  ic_id: number;
  ic_description: string;
  reference_image: string | null;
  rubric: RubricQuestionView[];
}

export interface Progress {
  completed: number;
  total: number;
  blinded: boolean;
}

export interface NextResponse {
  complete: boolean;
  assignment: AssignmentView | null;
  progress: Progress;
}

export interface CreateSessionResponse {
  session_id: string;
  total_rollouts: number;
}

export interface SubmitResponse {
  ok: boolean;
  progress: Progress;
}

export interface PolicyCounts {
  successes: number;
  failures: number;
  total: number;
}

export interface Comparison {
  first_policy: string;
  second_policy: string;
  prob_second_better: number;
  diff_interval: [number, number];
  level: number;
  excludes_zero: boolean;
  n_samples: number;
  seed: number;
}

export interface FinalizeResponse {
  plan: {
    entries: {
      rollout_index: number;
      blinded_label: string;
      policy_id: string;
      ic_id: number;
    }[];
    policies: string[];
  };
  rubric_counts: Record<string, Record<string, [number, number]>>;
  success_counts: Record<string, PolicyCounts>;
  comparisons: Comparison[];
  excluded_rollouts: number[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

/** Stable JSON body for a rubric submission; tested byte-for-byte. */
export function rubricPayload(
  answers: Record<string, boolean>,
  failureNote: string,
): string {
  const ordered: Record<string, boolean> = {};
  for (const key of Object.keys(answers).sort()) {
    ordered[key] = answers[key]!;
  }
  return JSON.stringify({ answers: ordered, failure_note: failureNote });
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      let code = "http_error";
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { error?: string; detail?: string };
        code = body.error ?? code;
        detail = body.detail ?? detail;
      } catch {
        /* non-JSON error body; keep defaults */
      }
      throw new ApiError(resp.status, code, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(
    task: unknown,
    policies: string[],
    repetitions: number,
    seed: number,
  ): Promise<CreateSessionResponse> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ task, policies, repetitions, seed }),
    });
  }

  next(sessionId: string): Promise<NextResponse> {
    return this.request(`/sessions/${sessionId}/next`);
  }

  submitRubric(
    sessionId: string,
    rolloutIndex: number,
    body: string,
  ): Promise<SubmitResponse> {
    return this.request(`/sessions/${sessionId}/rollouts/${rolloutIndex}/rubric`, {
      method: "POST",
      body,
    });
  }

  finalize(sessionId: string, force = false): Promise<FinalizeResponse> {
    return this.request(`/sessions/${sessionId}/finalize`, {
      method: "POST",
      body: JSON.stringify({ force }),
    });
  }

  reportJson(sessionId: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/report?format=json`);
  }
}
