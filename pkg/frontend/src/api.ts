// Typed client for the corpusforge HTTP API.
//
// The UI never computes domain state locally: every value it renders comes
// from a response in here, and every mutation is re-read from the server.

export type Level = "high" | "middle" | "low";
export type TaskState =
  | "pending"
  | "in_review"
  | "resolved_accept"
  | "resolved_edit"
  | "resolved_reject";
export type PairStatus =
  | "draft"
  | "auto_accepted"
  | "pending_review"
  | "in_review"
  | "accepted"
  | "edited"
  | "rejected";
export type ResolveAction = "accept" | "edit" | "reject";

export interface ProjectRecord {
  project_id: string;
  name: string;
  created_at: string;
  corpus_ingested: boolean;
  has_run: boolean;
  run_active: boolean;
  config: {
    source_lang: string;
    target_lang: string;
    pricing: { currency: string };
  };
}

export interface StageCounts {
  ingested: number;
  filtered_out: number;
  gec_changed: number;
  translated: number;
  ape_changed: number;
  scored: number;
}

export interface CostSummary {
  currency: string;
  per_level_counts: Record<Level, number>;
  per_level_cost: Record<Level, number>;
  total_editing_cost: number;
  from_scratch_cost: number;
  estimated_savings: number;
}

export interface Report {
  project_id: string;
  stage_counts: StageCounts;
  filter_rejections: Record<string, number>;
  level_histogram: Record<Level, number>;
  cost: CostSummary;
  adapter_ids: Record<string, string>;
  started_at: string;
  finished_at: string;
  config_fingerprint: string;
}

export interface RunProgress {
  running: true;
  progress: { stage?: string; done?: number; total?: number };
}

export interface PairView {
  source: string;
  target: string;
  raw_target: string;
  score: number | null;
  metrics: Record<string, number>;
  level: Level | null;
  status: PairStatus;
}

export interface TaskView {
  task_id: string;
  project_id: string;
  pair_id: string;
  level: Level;
  price: number;
  state: TaskState;
  assignee: string | null;
  edited_target: string | null;
  version: number;
  pair: PairView;
}

export interface TaskPage {
  items: TaskView[];
  page: number;
  page_size: number;
  total: number;
}

export interface TaskFilters {
  level?: Level;
  state?: TaskState;
  page?: number;
  pageSize?: number;
}

interface ErrorBody {
  code?: string;
  message?: string;
  details?: Record<string, unknown>;
}

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(status: number, body: ErrorBody) {
    super(body.message ?? `request failed with status ${status}`);
    this.code = body.code ?? "unknown";
    this.status = status;
    this.details = body.details ?? {};
  }
}

// Minimal response surface so tests can hand in a fake fetch.
export interface HttpResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<HttpResponse>;

export interface ApiClientOptions {
  baseUrl?: string;
  token?: string | null;
  fetchFn?: FetchLike;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string | null;
  private readonly fetchFn: FetchLike;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = options.baseUrl ?? "";
    this.token = options.token ?? null;
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
  }

  async listProjects(): Promise<ProjectRecord[]> {
    const body = (await this.request("GET", "/api/projects")) as {
      projects: ProjectRecord[];
    };
    return body.projects;
  }

  getProject(projectId: string): Promise<ProjectRecord> {
    return this.request("GET", `/api/projects/${encodeURIComponent(projectId)}`) as Promise<ProjectRecord>;
  }

  getReport(projectId: string): Promise<Report | RunProgress> {
    return this.request("GET", `/api/projects/${encodeURIComponent(projectId)}/report`) as Promise<Report | RunProgress>;
  }

  listTasks(projectId: string, filters: TaskFilters = {}): Promise<TaskPage> {
    const params = new URLSearchParams();
    if (filters.level) params.set("level", filters.level);
    if (filters.state) params.set("state", filters.state);
    if (filters.page) params.set("page", String(filters.page));
    if (filters.pageSize) params.set("page_size", String(filters.pageSize));
    const query = params.toString();
    const path = `/api/projects/${encodeURIComponent(projectId)}/tasks${query ? `?${query}` : ""}`;
    return this.request("GET", path) as Promise<TaskPage>;
  }

  claimTask(taskId: string, expectedVersion: number, assignee: string | null): Promise<TaskView> {
    return this.request("POST", `/api/tasks/${encodeURIComponent(taskId)}/claim`, {
      expected_version: expectedVersion,
      assignee,
    }) as Promise<TaskView>;
  }

  releaseTask(taskId: string, expectedVersion: number): Promise<TaskView> {
    return this.request("POST", `/api/tasks/${encodeURIComponent(taskId)}/release`, {
      expected_version: expectedVersion,
    }) as Promise<TaskView>;
  }

  resolveTask(
    taskId: string,
    action: ResolveAction,
    expectedVersion: number,
    editedTarget?: string,
  ): Promise<TaskView> {
    const payload: Record<string, unknown> = {
      action,
      expected_version: expectedVersion,
    };
    if (editedTarget !== undefined) payload.edited_target = editedTarget;
    return this.request("POST", `/api/tasks/${encodeURIComponent(taskId)}/resolve`, payload) as Promise<TaskView>;
  }

  exportUrl(projectId: string, format: "jsonl" | "tsv" = "jsonl"): string {
    return `${this.baseUrl}/api/projects/${encodeURIComponent(projectId)}/export?format=${format}`;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let parsed: ErrorBody = {};
      try {
        parsed = (await response.json()) as ErrorBody;
      } catch {
        // Non-JSON error body; keep the status-derived message.
      }
      throw new ApiError(response.status, parsed);
    }
    return response.json();
  }
}
