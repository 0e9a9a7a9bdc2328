// DOM-free conversation state: session persistence, one in-flight turn,
// message history, and per-turn trace retrieval. The app module binds this
// to the page; tests drive it against a stubbed gateway.

import { GatewayClient, GatewayError } from "./api.js";
import type { TraceRecord, UiMessage } from "./types.js";

export interface SessionStore {
  load(): string | null;
  save(sessionId: string): void;
  clear(): void;
}

export class MemorySessionStore implements SessionStore {
  private value: string | null = null;
  load() {
    return this.value;
  }
  save(sessionId: string) {
    this.value = sessionId;
  }
  clear() {
    this.value = null;
  }
}

export class ChatController {
  readonly messages: UiMessage[] = [];
  private sessionId: string | null = null;
  private inFlight = false;

  constructor(
    private client: GatewayClient,
    private store: SessionStore,
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  async ensureSession(): Promise<string> {
    if (this.sessionId) return this.sessionId;
    const stored = this.store.load();
    if (stored) {
      this.sessionId = stored;
      return stored;
    }
    const created = await this.client.createSession();
    this.sessionId = created;
    this.store.save(created);
    return created;
  }

  /** Send one turn; appends the user message and either the agent reply or
   * an error bubble. Rejects while a previous turn is still running. */
  async send(text: string): Promise<UiMessage> {
    const trimmed = text.trim();
    if (!trimmed) throw new Error("empty message");
    if (this.inFlight) throw new Error("previous turn still running");
    this.inFlight = true;
    this.messages.push({ role: "user", text: trimmed });
    try {
      const sessionId = await this.ensureSession();
      const reply = await this.client.sendMessage(sessionId, trimmed);
      const message: UiMessage = {
        role: "agent",
        text: reply.reply,
        riskReport: reply.risk_report,
        warnings: reply.warnings,
        traceId: reply.trace_id,
      };
      this.messages.push(message);
      return message;
    } catch (error) {
      const message: UiMessage = { role: "error", text: describeError(error) };
      if (error instanceof GatewayError && error.code === "unknown_session") {
        // The server forgot us (restart); start fresh next turn.
        this.store.clear();
        this.sessionId = null;
      }
      this.messages.push(message);
      return message;
    } finally {
      this.inFlight = false;
    }
  }

  /** The executed steps of one turn, in order. */
  async trace(traceId: string): Promise<TraceRecord[]> {
    const sessionId = await this.ensureSession();
    const records = await this.client.fetchTrace(sessionId);
    return records.filter((record) => record.trace_id === traceId);
  }
}

export function describeError(error: unknown): string {
  if (error instanceof GatewayError) {
    if (error.status === 409) return "The previous turn is still running; try again in a moment.";
    if (error.status === 422) return `The gateway rejected that message: ${error.message}`;
    if (error.status === 503) return "The language-model backend is unavailable right now.";
    return `Gateway error ${error.status}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}
