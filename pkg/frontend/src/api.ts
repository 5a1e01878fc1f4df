/**
 * Typed client for the trial-conduct service.
 *
 * All statistics shown in the UI come from these payloads verbatim; the
 * client never recomputes criterion values or admissibility.
 */

export interface ArmView {
  index: number;
  n: number;
  counts: number[];
  posterior_mode: number[];
  delta: number;
  delta_final: number;
  admissible: boolean;
  selection_probability: number | null;
  safety_threshold?: number | null;
  overdose_probability?: number | null;
}

export interface NextPreview {
  kind: "assign" | "terminate";
  arm: number | null;
  probabilities: number[] | null;
}

export interface SessionView {
  id: string;
  status: "in_progress" | "completed" | "terminated";
  seq: number;
  patients_treated: number;
  max_patients: number;
  rule: string;
  kappa: number;
  gamma: number[];
  pending_assignment: number | null;
  recommendation: number | null;
  recommended: boolean;
  arms: ArmView[];
  next_preview: NextPreview;
  hypothetical: boolean;
}

export interface AssignmentResponse {
  kind: "assign" | "terminate";
  arm: number | null;
  view: SessionView;
}

export interface RecommendationResponse {
  recommendation: number | null;
  terminated: boolean;
  view: SessionView;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  field?: string;
}

export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(err: ApiError) {
    super(err.message);
    this.status = err.status;
    this.code = err.code;
    this.field = err.field;
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ConductClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly token: string | null = null,
  ) {}

  private headers(json: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["X-Api-Token"] = this.token;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ServiceError({
        status: response.status,
        code: body.code ?? "error",
        message: body.message ?? response.statusText,
        field: body.field,
      });
    }
    return body as T;
  }

  createSession(config: unknown): Promise<SessionView> {
    return this.request("/api/trials", {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(config),
    });
  }

  getState(id: string): Promise<SessionView> {
    return this.request(`/api/trials/${id}`, { headers: this.headers(false) });
  }

  nextAssignment(id: string): Promise<AssignmentResponse> {
    return this.request(`/api/trials/${id}/assignments`, {
      method: "POST",
      headers: this.headers(true),
    });
  }

  recordOutcome(
    id: string,
    arm: number,
    outcome: number,
    idempotencyKey: string,
  ): Promise<SessionView> {
    return this.request(`/api/trials/${id}/outcomes`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ arm, outcome, idempotency_key: idempotencyKey }),
    });
  }

  whatIf(id: string, arm: number, outcome: number): Promise<SessionView> {
    return this.request(`/api/trials/${id}/whatif?arm=${arm}&outcome=${outcome}`, {
      headers: this.headers(false),
    });
  }

  recommendation(id: string): Promise<RecommendationResponse> {
    return this.request(`/api/trials/${id}/recommendation`, {
      headers: this.headers(false),
    });
  }
}
