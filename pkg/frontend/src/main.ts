// Application shell: project picker, polled dashboard, review workbench.
//
// The UI never computes pipeline state or money on its own; it renders
// whatever the service reports and refreshes on a fixed poll interval.

import {
  ApiClient,
  ApiError,
  type ProjectRecord,
  type Report,
  type RunProgress,
} from "./api.js";
import { renderDashboard, type DashboardState } from "./dashboard.js";
import { Workbench } from "./workbench.js";

export const POLL_INTERVAL_MS = 2000;
const TOKEN_KEY = "corpusforge_token";

function isRunProgress(payload: Report | RunProgress): payload is RunProgress {
  return (payload as RunProgress).running === true;
}

export async function loadDashboardState(
  api: ApiClient,
  projectId: string,
): Promise<DashboardState> {
  try {
    const payload = await api.getReport(projectId);
    if (isRunProgress(payload)) {
      return { kind: "running", progress: payload.progress };
    }
    return { kind: "ready", report: payload };
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      return { kind: "empty" };
    }
    throw error;
  }
}

export interface AppElements {
  picker: HTMLSelectElement;
  dashboard: HTMLElement;
  workbench: HTMLElement;
  status: HTMLElement;
}

export class App {
  private readonly api: ApiClient;
  private readonly elements: AppElements;
  private readonly reviewer: string;
  private projects: ProjectRecord[] = [];
  private workbench: Workbench | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(api: ApiClient, elements: AppElements, reviewer = "reviewer") {
    this.api = api;
    this.elements = elements;
    this.reviewer = reviewer;
    this.elements.picker.addEventListener("change", () => {
      void this.selectProject(this.elements.picker.value);
    });
    document.addEventListener("keydown", (event) => {
      this.workbench?.handleKey(event);
    });
  }

  currentProject(): ProjectRecord | null {
    return this.projects.find((p) => p.project_id === this.elements.picker.value) ?? null;
  }

  async start(): Promise<void> {
    try {
      this.projects = await this.api.listProjects();
    } catch (error) {
      this.showStatus(
        error instanceof ApiError
          ? `Cannot load projects (${error.code}): ${error.message}`
          : "Cannot reach the corpusforge service.",
      );
      return;
    }
    this.elements.picker.replaceChildren();
    for (const project of this.projects) {
      const option = document.createElement("option");
      option.value = project.project_id;
      option.textContent = `${project.name} (${project.project_id})`;
      this.elements.picker.appendChild(option);
    }
    if (this.projects.length === 0) {
      this.showStatus("No projects yet — create one through the API or CLI.");
      return;
    }
    this.showStatus("");
    await this.selectProject(this.projects[0]!.project_id);
    this.pollTimer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }

  stop(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  async selectProject(projectId: string): Promise<void> {
    const project = this.projects.find((p) => p.project_id === projectId);
    if (!project) return;
    this.elements.picker.value = projectId;
    this.workbench = new Workbench(this.elements.workbench, this.api, {
      projectId,
      currency: project.config.pricing.currency,
      reviewer: this.reviewer,
    });
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const project = this.currentProject();
    if (!project) return;
    try {
      const state = await loadDashboardState(this.api, project.project_id);
      renderDashboard(this.elements.dashboard, state);
      if (state.kind === "ready") {
        await this.workbench?.refresh();
      } else {
        this.elements.workbench.replaceChildren();
      }
    } catch (error) {
      this.showStatus(
        error instanceof ApiError
          ? `Refresh failed (${error.code}): ${error.message}`
          : "Refresh failed: the service is unreachable.",
      );
    }
  }

  private showStatus(message: string): void {
    this.elements.status.textContent = message;
    this.elements.status.classList.toggle("hidden", message === "");
  }
}

export function bootstrap(root: Document = document): App | null {
  const picker = root.getElementById("project-picker") as HTMLSelectElement | null;
  const dashboard = root.getElementById("dashboard");
  const workbench = root.getElementById("workbench");
  const status = root.getElementById("status");
  if (!picker || !dashboard || !workbench || !status) return null;

  const tokenInput = root.getElementById("token-input") as HTMLInputElement | null;
  const token = sessionStorage.getItem(TOKEN_KEY);
  if (tokenInput) {
    tokenInput.value = token ?? "";
    tokenInput.addEventListener("change", () => {
      sessionStorage.setItem(TOKEN_KEY, tokenInput.value);
      location.reload();
    });
  }

  const api = new ApiClient({ baseUrl: "", token });
  const app = new App(api, { picker, dashboard, workbench, status });
  void app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
}
