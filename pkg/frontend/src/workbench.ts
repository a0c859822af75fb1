// Review workbench: claim/edit/accept/reject over the task queue.
//
// The server is the single source of truth.  Every mutation sends the
// version this session last saw and re-renders from the response; a 409
// re-fetches the tasks and tells the reviewer someone else intervened,
// keeping the editor content so nothing typed is lost.
//
// The queue (left) is the state-filtered task list; the detail panel
// (right) holds the task being worked on, which stays visible even when
// a claim or resolve moves it out of the filtered queue.

import { ApiClient, ApiError, type Level, type TaskState, type TaskView } from "./api.js";
import { diffWords, toViewModel, type TaskViewModel } from "./model.js";

export interface WorkbenchOptions {
  projectId: string;
  currency: string;
  reviewer: string;
}

interface Filters {
  level?: Level;
  state?: TaskState;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Workbench {
  readonly container: HTMLElement;
  private readonly api: ApiClient;
  private readonly options: WorkbenchOptions;

  private all: TaskViewModel[] = [];
  private tasks: TaskViewModel[] = [];
  private current: TaskViewModel | null = null;
  private filters: Filters = { state: "pending" };
  private banner: string | null = null;
  private validation: string | null = null;
  private diffVisible = false;
  private editorText = "";

  constructor(container: HTMLElement, api: ApiClient, options: WorkbenchOptions) {
    this.container = container;
    this.api = api;
    this.options = options;
  }

  selected(): TaskViewModel | null {
    return this.current;
  }

  async refresh(): Promise<void> {
    const page = await this.api.listTasks(this.options.projectId, {
      level: this.filters.level,
      pageSize: 100,
    });
    this.all = page.items.map((t) => toViewModel(t, this.options.currency));
    this.rebuildQueue();
    const refreshed = this.current
      ? this.all.find((t) => t.taskId === this.current?.taskId) ?? null
      : null;
    if (refreshed) {
      this.current = refreshed;
      // Never clobber an edit in progress; otherwise mirror the server.
      if (refreshed.state !== "in_review") this.editorText = refreshed.target;
      this.render();
    } else if (this.tasks.length > 0) {
      this.selectTask(this.tasks[0]!.taskId);
    } else {
      this.current = null;
      this.render();
    }
  }

  async setFilters(filters: Filters): Promise<void> {
    this.filters = filters;
    this.current = null;
    this.editorText = "";
    await this.refresh();
  }

  selectTask(taskId: string): void {
    this.current = this.all.find((t) => t.taskId === taskId) ?? null;
    this.editorText = this.current ? this.current.target : "";
    this.validation = null;
    this.diffVisible = false;
    this.render();
  }

  selectNeighbor(offset: number): void {
    if (this.tasks.length === 0) return;
    const index = this.tasks.findIndex((t) => t.taskId === this.current?.taskId);
    const next = Math.min(Math.max(index + offset, 0), this.tasks.length - 1);
    this.selectTask(this.tasks[next]!.taskId);
  }

  setEditorText(text: string): void {
    this.editorText = text;
    this.validation = null;
  }

  toggleDiff(): void {
    this.diffVisible = !this.diffVisible;
    this.render();
  }

  async claim(): Promise<void> {
    const task = this.current;
    if (!task || task.state !== "pending") return;
    await this.mutate(() =>
      this.api.claimTask(task.taskId, task.version, this.options.reviewer),
    );
  }

  async release(): Promise<void> {
    const task = this.current;
    if (!task || task.state !== "in_review") return;
    await this.mutate(() => this.api.releaseTask(task.taskId, task.version));
  }

  async accept(): Promise<void> {
    const task = this.current;
    if (!task || task.state !== "in_review") return;
    await this.mutate(() =>
      this.api.resolveTask(task.taskId, "accept", task.version),
    );
  }

  async reject(): Promise<void> {
    const task = this.current;
    if (!task || task.state !== "in_review") return;
    await this.mutate(() =>
      this.api.resolveTask(task.taskId, "reject", task.version),
    );
  }

  async submitEdit(): Promise<void> {
    const task = this.current;
    if (!task || task.state !== "in_review") return;
    if (this.editorText.trim() === "") {
      this.validation = "The edited target cannot be empty.";
      this.render();
      return;
    }
    await this.mutate(() =>
      this.api.resolveTask(task.taskId, "edit", task.version, this.editorText),
    );
  }

  handleKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "TEXTAREA" || target.tagName === "INPUT")) return;
    switch (event.key.toLowerCase()) {
      case "j":
        this.selectNeighbor(1);
        break;
      case "k":
        this.selectNeighbor(-1);
        break;
      case "c":
        void this.claim();
        break;
      case "a":
        void this.accept();
        break;
      case "r":
        void this.reject();
        break;
      case "d":
        this.toggleDiff();
        break;
    }
  }

  private rebuildQueue(): void {
    const state = this.filters.state;
    this.tasks = state === undefined ? [...this.all] : this.all.filter((t) => t.state === state);
  }

  private async mutate(call: () => Promise<TaskView>): Promise<void> {
    this.banner = null;
    this.validation = null;
    try {
      this.applyServerTask(await call());
    } catch (error) {
      if (error instanceof ApiError && error.code === "conflict") {
        this.banner =
          "Another reviewer intervened: the task changed on the server and was reloaded. Your edit below is preserved.";
        await this.reloadPreservingEditor();
        return;
      }
      if (error instanceof ApiError) {
        this.banner = `Request failed (${error.code}): ${error.message}`;
      } else {
        this.banner = "Network error — nothing was changed. Try again.";
      }
    }
    this.render();
  }

  private applyServerTask(raw: TaskView): void {
    const view = toViewModel(raw, this.options.currency);
    const index = this.all.findIndex((t) => t.taskId === view.taskId);
    if (index >= 0) {
      this.all[index] = view;
    } else {
      this.all.push(view);
    }
    this.rebuildQueue();
    if (this.current?.taskId === view.taskId) {
      this.current = view;
      // Server truth: for an edit resolve the target is what was submitted.
      this.editorText = view.target;
    }
  }

  private async reloadPreservingEditor(): Promise<void> {
    const keep = this.editorText;
    await this.refresh();
    this.editorText = keep;
    this.render();
  }

  render(): void {
    this.container.replaceChildren();

    if (this.banner !== null) {
      this.container.appendChild(el("div", "banner conflict-banner", this.banner));
    }

    const layout = el("div", "workbench-layout");
    layout.appendChild(this.renderQueue());
    layout.appendChild(this.renderDetail());
    this.container.appendChild(layout);
  }

  private renderQueue(): HTMLElement {
    const queue = el("aside", "task-queue");
    queue.appendChild(el("h2", "card-title", `Queue (${this.tasks.length})`));
    const list = el("ul", "task-list");
    for (const task of this.tasks) {
      const item = el("li", `task-item level-${task.level}`);
      item.dataset.taskId = task.taskId;
      if (task.taskId === this.current?.taskId) item.classList.add("selected");
      item.appendChild(el("span", "task-badge", task.levelBadge));
      item.appendChild(el("span", "task-source", task.source));
      item.appendChild(el("span", "task-price", task.priceLabel));
      item.addEventListener("click", () => this.selectTask(task.taskId));
      list.appendChild(item);
    }
    if (this.tasks.length === 0) {
      list.appendChild(el("li", "task-item empty", "No tasks match the filter."));
    }
    queue.appendChild(list);
    return queue;
  }

  private renderDetail(): HTMLElement {
    const detail = el("section", "task-detail");
    const task = this.current;
    if (!task) {
      detail.appendChild(el("p", "empty-hint", "Select a task from the queue."));
      return detail;
    }

    const header = el("header", "detail-header");
    header.appendChild(el("span", `badge level-badge level-${task.level}`, task.levelBadge));
    header.appendChild(el("span", "badge state-badge", task.state));
    header.appendChild(el("span", "badge price-badge", task.priceLabel));
    header.appendChild(el("span", "badge score-badge", `QE ${task.scoreLabel}`));
    detail.appendChild(header);

    const panes = el("div", "editor-panes");
    const sourcePane = el("div", "pane source-pane");
    sourcePane.appendChild(el("h3", "pane-title", "Source"));
    sourcePane.appendChild(el("p", "pane-text source-text", task.source));
    panes.appendChild(sourcePane);

    const targetPane = el("div", "pane target-pane");
    targetPane.appendChild(el("h3", "pane-title", "Target"));
    const editor = document.createElement("textarea");
    editor.className = "target-editor";
    editor.value = this.editorText;
    editor.disabled = task.state !== "in_review";
    editor.addEventListener("input", () => this.setEditorText(editor.value));
    targetPane.appendChild(editor);
    panes.appendChild(targetPane);
    detail.appendChild(panes);

    if (this.validation !== null) {
      detail.appendChild(el("p", "validation-error", this.validation));
    }

    if (this.diffVisible) {
      const diff = el("div", "diff-view");
      diff.appendChild(el("h3", "pane-title", "Raw machine target vs current"));
      const body = el("p", "diff-body");
      for (const segment of diffWords(task.rawTarget, this.editorText)) {
        body.appendChild(el("span", `diff-${segment.op}`, `${segment.text} `));
      }
      diff.appendChild(body);
      detail.appendChild(diff);
    }

    const actions = el("div", "detail-actions");
    const button = (label: string, className: string, handler: () => void, enabled: boolean) => {
      const node = document.createElement("button");
      node.className = `btn ${className}`;
      node.textContent = label;
      node.disabled = !enabled;
      node.addEventListener("click", handler);
      actions.appendChild(node);
    };
    const inReview = task.state === "in_review";
    button("Claim (C)", "btn-claim", () => void this.claim(), task.state === "pending");
    button("Accept (A)", "btn-accept", () => void this.accept(), inReview);
    button("Save edit", "btn-edit", () => void this.submitEdit(), inReview);
    button("Reject (R)", "btn-reject", () => void this.reject(), inReview);
    button("Release", "btn-release", () => void this.release(), inReview);
    button("Diff (D)", "btn-diff", () => this.toggleDiff(), true);
    detail.appendChild(actions);

    const metrics = el("div", "metric-list");
    for (const [metric, value] of Object.entries(task.metrics)) {
      metrics.appendChild(el("span", "metric", `${metric}: ${value.toFixed(3)}`));
    }
    detail.appendChild(metrics);

    return detail;
  }
}
