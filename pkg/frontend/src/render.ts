// Pure HTML renderers. Every number shown comes straight from the server
// payload (display formatting only, no nutrient arithmetic on the client).

import {
  NUTRIENT_ORDER,
  NUTRIENT_TITLES,
  type Nutrient,
  type RiskReport,
  type TraceRecord,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function labelClass(label: string): string {
  if (label === "Risky") return "risky";
  if (label === "NotRisky") return "not-risky";
  return "indeterminate";
}

function cellValue(report: RiskReport, nutrient: Nutrient): string {
  if (nutrient in report.percents) {
    return `${report.percents[nutrient].toFixed(2)}% of energy`;
  }
  if (nutrient === "sodium") return `${report.totals[nutrient].toFixed(2)} mg`;
  if (
    nutrient === "carbohydrate" ||
    nutrient === "fat" ||
    nutrient === "saturated_fat" ||
    nutrient === "protein"
  ) {
    return "n/a";
  }
  return `${report.totals[nutrient].toFixed(2)} g`;
}

/** One labeled cell per tracked nutrient; Risky cells are distinguished by
 * both a class (color) and the literal word, never color alone. */
export function riskTableHtml(report: RiskReport): string {
  const headers = NUTRIENT_ORDER.map(
    (n) => `<th scope="col">${escapeHtml(NUTRIENT_TITLES[n])}</th>`,
  ).join("");
  const cells = NUTRIENT_ORDER.map((n) => {
    const label = report.labels[n] ?? "Indeterminate";
    return (
      `<td class="risk-cell ${labelClass(label)}">` +
      `<span class="risk-label">${escapeHtml(label)}</span>` +
      `<span class="risk-value">${escapeHtml(cellValue(report, n))}</span>` +
      `</td>`
    );
  }).join("");
  return (
    `<table class="risk-table" aria-label="nutrient risk assessment">` +
    `<thead><tr>${headers}</tr></thead>` +
    `<tbody><tr>${cells}</tr></tbody>` +
    `</table>`
  );
}

export function warningsHtml(warnings: string[]): string {
  if (!warnings.length) return "";
  const items = warnings
    .map((w) => `<li class="warning">${escapeHtml(w)}</li>`)
    .join("");
  return `<ul class="warnings">${items}</ul>`;
}

/** Ordered step list for the explainability panel. */
export function traceListHtml(records: TraceRecord[]): string {
  if (!records.length) {
    return `<p class="trace-empty">No steps recorded for this turn yet.</p>`;
  }
  const items = [...records]
    .sort((a, b) => a.step_index - b.step_index)
    .map((record) => {
      const failed = record.outcome.status === "error";
      const badge = failed
        ? `<span class="badge error">failed</span>`
        : `<span class="badge ok">${escapeHtml(record.outcome.status)}</span>`;
      const detail = failed
        ? `<span class="trace-error">${escapeHtml(record.outcome.error ?? "")}</span>`
        : "";
      return (
        `<li class="trace-step${failed ? " failed" : ""}">` +
        `<code>${escapeHtml(record.action)}</code> ${badge} ` +
        `<span class="trace-input">${escapeHtml(record.action_input)}</span> ` +
        `<span class="trace-duration">${record.duration_ms.toFixed(1)} ms</span>` +
        detail +
        `</li>`
      );
    })
    .join("");
  return `<ol class="trace-steps">${items}</ol>`;
}
