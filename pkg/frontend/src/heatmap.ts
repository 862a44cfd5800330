// Step-by-log-entry matrix view. The grid is colored by label; each step's
// earliest executed entry, premature steps and missing steps are highlighted
// from the debug verdict's evidence, and the step where the greedy validation
// stalled carries a convergence marker. Pure model building is separated from
// DOM rendering so both are unit-testable.

import type { FlowStep, MatrixCell, MatrixExport, Verdict } from "./types.js";

export interface HeatmapCell extends MatrixCell {
  earliest: boolean;
}

export interface HeatmapRow {
  step: number;
  description: string;
  missing: boolean;
  premature: boolean;
  cells: HeatmapCell[];
}

export interface HeatmapModel {
  m: number;
  n: number;
  rows: HeatmapRow[];
  /** step at which the greedy validation stalled; null for a greedy pass */
  convergenceStep: number | null;
  outOfOrderPairs: [[number, number], [number, number]][];
}

export function convergenceStep(valVerdict: Verdict | null): number | null {
  if (!valVerdict || valVerdict.kind !== "fail") {
    return null;
  }
  return valVerdict.matched_assignment.length + 1;
}

export function buildHeatmapModel(
  matrix: MatrixExport,
  steps: FlowStep[],
  valVerdict: Verdict | null,
  debugVerdict: Verdict | null,
): HeatmapModel {
  const earliest = new Set(
    (debugVerdict?.matched_assignment ?? []).map(([s, i]) => `${s}:${i}`),
  );
  const missing = new Set(debugVerdict?.missing_steps ?? []);
  const premature = new Set(
    (debugVerdict?.out_of_order_pairs ?? []).map(([, later]) => later[0]),
  );

  const rows: HeatmapRow[] = matrix.rows.map((cells, idx) => {
    const step = idx + 1;
    return {
      step,
      description: steps[idx]?.description ?? `step ${step}`,
      missing: missing.has(step),
      premature: premature.has(step),
      cells: cells.map((cell) => ({
        ...cell,
        earliest: earliest.has(`${cell.step}:${cell.log_index}`),
      })),
    };
  });

  return {
    m: matrix.m,
    n: matrix.n,
    rows,
    convergenceStep: convergenceStep(valVerdict),
    outOfOrderPairs: debugVerdict?.out_of_order_pairs ?? [],
  };
}

function cellTooltip(cell: HeatmapCell): string {
  const label = cell.label.replace("_", " ");
  const confidence = cell.confidence === null ? "n/a" : `${cell.confidence}%`;
  const explanation = cell.explanation ?? "not classified";
  return `step ${cell.step} / log ${cell.log_index}\n${label} (confidence ${confidence})\n${explanation}`;
}

export function renderHeatmap(model: HeatmapModel, doc: Document): HTMLElement {
  const root = doc.createElement("div");
  root.className = "heatmap";
  root.dataset.testid = "matrix-heatmap";

  const legend = doc.createElement("p");
  legend.className = "heatmap-legend";
  legend.textContent =
    `${model.m} steps x ${model.n} log entries - ` +
    "green: executed, grey: not executed, hatched: unclassified; " +
    "ring marks each step's earliest occurrence";
  root.appendChild(legend);

  const table = doc.createElement("table");
  table.className = "heatmap-grid";

  for (const row of model.rows) {
    const tr = doc.createElement("tr");
    tr.dataset.testid = `heatmap-row-${row.step}`;
    if (row.missing) tr.classList.add("row-missing");
    if (row.premature) tr.classList.add("row-premature");

    const th = doc.createElement("th");
    th.scope = "row";
    th.textContent = `${row.step}. ${row.description}`;
    if (model.convergenceStep === row.step) {
      const marker = doc.createElement("span");
      marker.className = "convergence-marker";
      marker.dataset.testid = "convergence-marker";
      marker.title = "greedy validation stalled at this step";
      marker.textContent = " [validation stalled here]";
      th.appendChild(marker);
    }
    if (row.missing) {
      const badge = doc.createElement("span");
      badge.className = "badge badge-missing";
      badge.textContent = " missing";
      th.appendChild(badge);
    }
    if (row.premature) {
      const badge = doc.createElement("span");
      badge.className = "badge badge-premature";
      badge.textContent = " premature";
      th.appendChild(badge);
    }
    tr.appendChild(th);

    for (const cell of row.cells) {
      const td = doc.createElement("td");
      td.dataset.testid = `heatmap-cell-${cell.step}-${cell.log_index}`;
      td.className = `cell cell-${cell.label}`;
      if (cell.earliest) td.classList.add("cell-earliest");
      td.title = cellTooltip(cell);
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }

  root.appendChild(table);
  return root;
}
