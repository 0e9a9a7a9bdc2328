// Typed client for the gateway. All network access goes through here;
// the fetch function is injectable so tests can stub the gateway.

import type { MessageReply, TraceRecord } from "./types.js";

export class GatewayError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "GatewayError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForEnvelope(response: Response): Promise<never> {
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = body.message ?? message;
    }
  } catch {
    // body was not the JSON envelope; keep the generic message
  }
  throw new GatewayError(response.status, code, message);
}

export class GatewayClient {
  private fetchFn: FetchLike;

  constructor(
    public baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async post(path: string, body?: unknown): Promise<Response> {
    return this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  async createSession(): Promise<string> {
    const response = await this.post("/v1/sessions");
    if (response.status !== 201) await raiseForEnvelope(response);
    const body = await response.json();
    return body.session_id as string;
  }

  async sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    const response = await this.post(`/v1/sessions/${sessionId}/messages`, { text });
    if (!response.ok) await raiseForEnvelope(response);
    return (await response.json()) as MessageReply;
  }

  async fetchTrace(sessionId: string): Promise<TraceRecord[]> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/trace`);
    if (!response.ok) await raiseForEnvelope(response);
    const body = await response.json();
    return body.records as TraceRecord[];
  }

  async health(): Promise<{ status: string; db_foods: number; mode: string }> {
    const response = await this.fetchFn(`${this.baseUrl}/healthz`);
    if (!response.ok) await raiseForEnvelope(response);
    return await response.json();
  }
}
