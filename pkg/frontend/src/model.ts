// View models and formatting helpers.
//
// Everything here is a 1:1 re-rendering of API values: prices stay in
// integer minor units until the final formatting step, badges mirror the
// API level string exactly, and nothing recomputes cost or state.

import type { Level, PairStatus, TaskState, TaskView } from "./api.js";

export interface TaskViewModel {
  taskId: string;
  projectId: string;
  pairId: string;
  level: Level;
  levelBadge: string;
  state: TaskState;
  price: number;
  priceLabel: string;
  assignee: string | null;
  editedTarget: string | null;
  version: number;
  source: string;
  target: string;
  rawTarget: string;
  score: number | null;
  scoreLabel: string;
  metrics: Record<string, number>;
  status: PairStatus;
}

// Fixed two-decimal rendering of integer minor units, locale-independent.
export function formatPrice(minorUnits: number, currency: string): string {
  if (!Number.isInteger(minorUnits) || minorUnits < 0) {
    throw new Error(`price must be a non-negative integer, got ${minorUnits}`);
  }
  const whole = Math.floor(minorUnits / 100);
  const cents = String(minorUnits % 100).padStart(2, "0");
  return `${currency} ${whole}.${cents}`;
}

export function formatScore(score: number | null): string {
  return score === null ? "—" : score.toFixed(3);
}

export function toViewModel(task: TaskView, currency: string): TaskViewModel {
  return {
    taskId: task.task_id,
    projectId: task.project_id,
    pairId: task.pair_id,
    level: task.level,
    levelBadge: task.level.toUpperCase(),
    state: task.state,
    price: task.price,
    priceLabel: formatPrice(task.price, currency),
    assignee: task.assignee,
    editedTarget: task.edited_target,
    version: task.version,
    source: task.pair.source,
    target: task.pair.target,
    rawTarget: task.pair.raw_target,
    score: task.pair.score,
    scoreLabel: formatScore(task.pair.score),
    metrics: task.pair.metrics,
    status: task.pair.status,
  };
}

export interface HistogramRow {
  level: Level;
  count: number;
}

// Identity mapping of the report histogram into display order (high first).
export function histogramRows(histogram: Record<Level, number>): HistogramRow[] {
  return [
    { level: "high", count: histogram.high },
    { level: "middle", count: histogram.middle },
    { level: "low", count: histogram.low },
  ];
}

export type DiffOp = "same" | "added" | "removed";

export interface DiffSegment {
  op: DiffOp;
  text: string;
}

// Word-level diff (longest common subsequence) between the raw machine
// target and the current target, for the workbench diff toggle.  Purely
// presentational; never feeds back into any state.
export function diffWords(before: string, after: string): DiffSegment[] {
  const a = before.split(/\s+/).filter((w) => w.length > 0);
  const b = after.split(/\s+/).filter((w) => w.length > 0);
  const lcs: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i]![j] =
        a[i] === b[j]
          ? lcs[i + 1]![j + 1]! + 1
          : Math.max(lcs[i + 1]![j]!, lcs[i]![j + 1]!);
    }
  }
  const segments: DiffSegment[] = [];
  const push = (op: DiffOp, text: string) => {
    const last = segments[segments.length - 1];
    if (last && last.op === op) {
      last.text += ` ${text}`;
    } else {
      segments.push({ op, text });
    }
  };
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      push("same", a[i]!);
      i++;
      j++;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      push("removed", a[i]!);
      i++;
    } else {
      push("added", b[j]!);
      j++;
    }
  }
  while (i < a.length) push("removed", a[i++]!);
  while (j < b.length) push("added", b[j++]!);
  return segments;
}
