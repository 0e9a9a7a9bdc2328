// Wire types for the gateway's /v1 JSON API.

export const NUTRIENT_ORDER = [
  "carbohydrate",
  "fat",
  "saturated_fat",
  "protein",
  "sodium",
  "sugars",
  "dietary_fiber",
] as const;

export type Nutrient = (typeof NUTRIENT_ORDER)[number];

export const NUTRIENT_TITLES: Record<Nutrient, string> = {
  carbohydrate: "Carbohydrate",
  fat: "Fat",
  saturated_fat: "Saturated fat",
  protein: "Protein",
  sodium: "Sodium",
  sugars: "Sugars",
  dietary_fiber: "Dietary fiber",
};

export interface RiskReport {
  totals: Record<string, number>;
  percents: Record<string, number>;
  labels: Record<string, string>;
  guideline_version: string;
}

export interface MessageReply {
  reply: string;
  trace_id: string;
  warnings: string[];
  replied_at: number;
  risk_report?: RiskReport;
}

export interface TraceOutcome {
  status: string;
  pipe_key?: string;
  error?: string;
}

export interface TraceRecord {
  trace_id: string;
  step_index: number;
  thought: string;
  action: string;
  action_input: string;
  outcome: TraceOutcome;
  duration_ms: number;
  created_at: number;
}

export interface UiMessage {
  role: "user" | "agent" | "error";
  text: string;
  riskReport?: RiskReport;
  warnings?: string[];
  traceId?: string;
}
