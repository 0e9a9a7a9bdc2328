// Page wiring: binds the chat controller to the DOM. The gateway URL is
// taken from window.DIETAGENT_GATEWAY_URL when set (runtime config) and
// falls back to the page's own origin.

import { GatewayClient } from "./api.js";
import { ChatController, type SessionStore } from "./controller.js";
import { riskTableHtml, traceListHtml, warningsHtml, escapeHtml } from "./render.js";
import type { UiMessage } from "./types.js";

declare global {
  interface Window {
    DIETAGENT_GATEWAY_URL?: string;
  }
}

const SESSION_KEY = "dietagent.session_id";

class LocalSessionStore implements SessionStore {
  load() {
    return window.localStorage.getItem(SESSION_KEY);
  }
  save(sessionId: string) {
    window.localStorage.setItem(SESSION_KEY, sessionId);
  }
  clear() {
    window.localStorage.removeItem(SESSION_KEY);
  }
}

function messageElement(message: UiMessage, controller: ChatController): HTMLElement {
  const bubble = document.createElement("div");
  bubble.className = `msg ${message.role}`;

  const text = document.createElement("div");
  text.className = "msg-text";
  text.textContent = message.text;
  bubble.appendChild(text);

  if (message.role === "error") {
    const dismiss = document.createElement("button");
    dismiss.className = "dismiss";
    dismiss.textContent = "dismiss";
    dismiss.onclick = () => bubble.remove();
    bubble.appendChild(dismiss);
    return bubble;
  }

  if (message.riskReport) {
    const table = document.createElement("div");
    table.className = "report";
    table.innerHTML = riskTableHtml(message.riskReport);
    bubble.appendChild(table);
  }
  if (message.warnings?.length) {
    const warnings = document.createElement("div");
    warnings.innerHTML = warningsHtml(message.warnings);
    bubble.appendChild(warnings);
  }
  if (message.role === "agent" && message.traceId) {
    const toggle = document.createElement("button");
    toggle.className = "trace-toggle";
    toggle.textContent = "how was this computed?";
    const panel = document.createElement("div");
    panel.className = "trace-panel";
    panel.hidden = true;
    toggle.onclick = async () => {
      panel.hidden = !panel.hidden;
      if (!panel.hidden && !panel.innerHTML) {
        try {
          const records = await controller.trace(message.traceId!);
          panel.innerHTML = traceListHtml(records);
        } catch {
          panel.innerHTML = `<p class="trace-empty">${escapeHtml("trace unavailable")}</p>`;
        }
      }
    };
    bubble.appendChild(toggle);
    bubble.appendChild(panel);
  }
  return bubble;
}

export function init(root: Document): void {
  const gatewayUrl = window.DIETAGENT_GATEWAY_URL || window.location.origin;
  const controller = new ChatController(
    new GatewayClient(gatewayUrl),
    new LocalSessionStore(),
  );

  const log = root.getElementById("messages")!;
  const input = root.getElementById("input") as HTMLTextAreaElement;
  const send = root.getElementById("send") as HTMLButtonElement;

  const sync = () => {
    send.disabled = controller.busy || !input.value.trim();
  };

  const submit = async () => {
    const text = input.value;
    if (!text.trim() || controller.busy) return;
    input.value = "";
    sync();
    log.appendChild(messageElement({ role: "user", text: text.trim() }, controller));
    log.scrollTop = log.scrollHeight;
    const reply = await controller.send(text);
    if (reply.role === "error") {
      input.value = text; // preserve the input for retry
    }
    log.appendChild(messageElement(reply, controller));
    log.scrollTop = log.scrollHeight;
    sync();
    input.focus();
  };

  send.onclick = submit;
  input.onkeydown = (event) => {
    if (event.key === "Enter" && !event.shiftKey) {
      event.preventDefault();
      void submit();
    }
  };
  input.oninput = sync;
  sync();
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => init(document));
  } else {
    init(document);
  }
}
