import { describe, expect, it } from "vitest";

import { escapeHtml, riskTableHtml, traceListHtml, warningsHtml } from "../src/render.js";
import { NUTRIENT_ORDER, type RiskReport, type TraceRecord } from "../src/types.js";

const REPORT: RiskReport = {
  totals: {
    energy: 509.24,
    carbohydrate: 57.37,
    fat: 19.13,
    saturated_fat: 8.09,
    protein: 24.67,
    sodium: 230.5,
    sugars: 12.97,
    dietary_fiber: 0.63,
  },
  percents: {
    carbohydrate: 45.06,
    fat: 33.8,
    saturated_fat: 14.3,
    protein: 19.38,
  },
  labels: {
    carbohydrate: "Risky",
    fat: "NotRisky",
    saturated_fat: "Risky",
    protein: "NotRisky",
    sodium: "NotRisky",
    sugars: "NotRisky",
    dietary_fiber: "Risky",
  },
  guideline_version: "ada-aha-v1",
};

describe("riskTableHtml", () => {
  it("renders exactly one labeled cell per tracked nutrient", () => {
    const html = riskTableHtml(REPORT);
    expect(html.match(/<td/g)).toHaveLength(7);
    expect(html.match(/<th scope/g)).toHaveLength(7);
  });

  it("marks risky cells with both a class and the literal word", () => {
    const html = riskTableHtml(REPORT);
    const riskyCells = html.match(/risk-cell risky/g) ?? [];
    expect(riskyCells).toHaveLength(3);
    expect(html).toContain('<span class="risk-label">Risky</span>');
    expect(html).toContain('<span class="risk-label">NotRisky</span>');
  });

  it("shows server values verbatim (formatted, never recomputed)", () => {
    const html = riskTableHtml(REPORT);
    expect(html).toContain("45.06% of energy");
    expect(html).toContain("230.50 mg");
    expect(html).toContain("0.63 g");
  });

  it("handles indeterminate percent rules", () => {
    const report: RiskReport = {
      ...REPORT,
      percents: {},
      labels: { ...REPORT.labels, carbohydrate: "Indeterminate" },
    };
    const html = riskTableHtml(report);
    expect(html).toContain("indeterminate");
    expect(html).toContain("Indeterminate");
    expect(html).toContain("n/a");
  });
});

describe("traceListHtml", () => {
  const record = (overrides: Partial<TraceRecord>): TraceRecord => ({
    trace_id: "t0001",
    step_index: 0,
    thought: "",
    action: "meal_nutrition_lookup",
    action_input: '{"text": "2 eggs"}',
    outcome: { status: "success", pipe_key: "p0000" },
    duration_ms: 1.25,
    created_at: 0,
    ...overrides,
  });

  it("lists steps in order", () => {
    const html = traceListHtml([
      record({ step_index: 1, action: "diet_risk_assessment" }),
      record({ step_index: 0, action: "meal_nutrition_lookup" }),
      record({ step_index: 2, action: "Final", outcome: { status: "final" } }),
    ]);
    const lookup = html.indexOf("meal_nutrition_lookup");
    const assess = html.indexOf("diet_risk_assessment");
    const final = html.indexOf("Final");
    expect(lookup).toBeGreaterThan(-1);
    expect(lookup).toBeLessThan(assess);
    expect(assess).toBeLessThan(final);
  });

  it("marks failed steps with an error badge", () => {
    const html = traceListHtml([
      record({
        outcome: { status: "error", error: "FoodNotFound: no food record for 'stardust'" },
      }),
    ]);
    expect(html).toContain('class="badge error"');
    expect(html).toContain("stardust");
  });

  it("renders an empty state before any steps exist", () => {
    expect(traceListHtml([])).toContain("No steps recorded");
  });
});

describe("escaping", () => {
  it("escapes markup in server strings", () => {
    expect(escapeHtml("<script>alert(1)</script>")).not.toContain("<script>");
    const html = warningsHtml(['item 1: no food record for "<b>x</b>"']);
    expect(html).not.toContain("<b>");
    expect(html).toContain("&lt;b&gt;");
  });

  it("nutrient order matches the report column order", () => {
    expect(NUTRIENT_ORDER).toHaveLength(7);
    expect(NUTRIENT_ORDER[0]).toBe("carbohydrate");
    expect(NUTRIENT_ORDER[6]).toBe("dietary_fiber");
  });
});
