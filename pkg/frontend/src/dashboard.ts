// Project dashboard: stage counts, level histogram, cost summary.
//
// Every number is an exact re-rendering of the report payload; the bar
// widths are the only derived quantity and the printed counts next to
// them stay verbatim.

import type { Report, RunProgress } from "./api.js";
import { formatPrice, histogramRows } from "./model.js";

export type DashboardState =
  | { kind: "empty" }
  | { kind: "running"; progress: RunProgress["progress"] }
  | { kind: "ready"; report: Report };

const LEVEL_LABELS: Record<string, string> = {
  high: "High — auto-accepted",
  middle: "Middle — light review",
  low: "Low — heavy review",
};

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function statRow(label: string, value: string): HTMLElement {
  const row = el("div", "stat-row");
  row.appendChild(el("span", "stat-label", label));
  row.appendChild(el("span", "stat-value", value));
  return row;
}

export function renderDashboard(container: HTMLElement, state: DashboardState): void {
  container.replaceChildren();

  if (state.kind === "empty") {
    const empty = el("div", "empty-state");
    empty.appendChild(el("p", "empty-title", "No report yet"));
    empty.appendChild(
      el(
        "p",
        "empty-hint",
        "Ingest a corpus and run the pipeline to see the quality histogram and cost estimate here.",
      ),
    );
    container.appendChild(empty);
    return;
  }

  if (state.kind === "running") {
    const running = el("div", "running-state");
    const stage = state.progress.stage ?? "starting";
    const done = state.progress.done ?? 0;
    const total = state.progress.total ?? 0;
    running.appendChild(el("p", "running-title", "Pipeline running…"));
    running.appendChild(
      el("p", "running-detail", `stage ${stage} (${done}/${total} segments)`),
    );
    container.appendChild(running);
    return;
  }

  const report = state.report;

  const counts = el("section", "card stage-counts");
  counts.appendChild(el("h2", "card-title", "Stages"));
  counts.appendChild(statRow("Ingested", String(report.stage_counts.ingested)));
  counts.appendChild(statRow("Filtered out", String(report.stage_counts.filtered_out)));
  counts.appendChild(statRow("GEC changed", String(report.stage_counts.gec_changed)));
  counts.appendChild(statRow("Translated", String(report.stage_counts.translated)));
  counts.appendChild(statRow("APE changed", String(report.stage_counts.ape_changed)));
  counts.appendChild(statRow("Scored", String(report.stage_counts.scored)));
  container.appendChild(counts);

  const histogram = el("section", "card histogram");
  histogram.appendChild(el("h2", "card-title", "Quality levels"));
  const rows = histogramRows(report.level_histogram);
  const max = Math.max(1, ...rows.map((row) => row.count));
  for (const row of rows) {
    const line = el("div", `histogram-row level-${row.level}`);
    line.dataset.level = row.level;
    line.dataset.count = String(row.count);
    line.appendChild(el("span", "histogram-label", LEVEL_LABELS[row.level] ?? row.level));
    const track = el("div", "histogram-track");
    const bar = el("div", "histogram-bar");
    bar.style.width = `${(row.count / max) * 100}%`;
    track.appendChild(bar);
    line.appendChild(track);
    line.appendChild(el("span", "histogram-count", String(row.count)));
    histogram.appendChild(line);
  }
  container.appendChild(histogram);

  const cost = el("section", "card cost");
  cost.appendChild(el("h2", "card-title", "Cost estimate"));
  const currency = report.cost.currency;
  cost.appendChild(
    statRow("Editing cost", formatPrice(report.cost.total_editing_cost, currency)),
  );
  cost.appendChild(
    statRow("From scratch", formatPrice(report.cost.from_scratch_cost, currency)),
  );
  const savings = statRow(
    "Estimated savings",
    formatPrice(report.cost.estimated_savings, currency),
  );
  savings.classList.add("savings");
  cost.appendChild(savings);
  container.appendChild(cost);

  const rejections = Object.entries(report.filter_rejections);
  if (rejections.length > 0) {
    const card = el("section", "card rejections");
    card.appendChild(el("h2", "card-title", "Filter rejections"));
    for (const [reason, count] of rejections) {
      card.appendChild(statRow(reason.replaceAll("_", " "), String(count)));
    }
    container.appendChild(card);
  }
}
