/** Chat console: message list, input form, one in-flight query at a time. */

import { ChatApiClient, ChatApiError, type ChatResponse } from "./api.js";
import { renderContexts } from "./contexts.js";

export interface UiMessage {
  role: "user" | "bot";
  text: string;
  sources?: string[];
  contexts?: ChatResponse["contexts"];
  timestamp: number;
}

export interface ChatApp {
  root: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  messages: UiMessage[];
  sendQuery(text: string): Promise<void>;
}

function messageBubble(message: UiMessage): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = `message ${message.role}-message`;

  const text = document.createElement("div");
  text.className = "message-text";
  text.textContent = message.text;
  wrapper.appendChild(text);

  if (message.role === "bot") {
    const sources = document.createElement("div");
    sources.className = "message-sources";
    if (message.sources && message.sources.length > 0) {
      sources.textContent = `sources: ${message.sources.join(", ")}`;
    } else {
      sources.textContent = "ungrounded";
      sources.classList.add("ungrounded");
    }
    wrapper.appendChild(sources);
    wrapper.appendChild(renderContexts(message.contexts ?? []));
  }
  return wrapper;
}

export function createChatApp(root: HTMLElement, client: ChatApiClient): ChatApp {
  root.innerHTML = `
    <div class="chat-console">
      <div class="message-list"></div>
      <form class="chat-form">
        <input class="chat-input" type="text" autocomplete="off"
               placeholder="Ask about a threat, CVE, or campaign…" />
        <button class="send-button" type="submit" disabled>Send</button>
      </form>
    </div>`;

  const list = root.querySelector(".message-list") as HTMLElement;
  const form = root.querySelector(".chat-form") as HTMLFormElement;
  const input = root.querySelector(".chat-input") as HTMLInputElement;
  const sendButton = root.querySelector(".send-button") as HTMLButtonElement;

  const messages: UiMessage[] = [];
  let inFlight = false;

  function refreshSendState(): void {
    sendButton.disabled = inFlight || input.value.trim().length === 0;
  }

  function append(message: UiMessage): void {
    messages.push(message);
    list.appendChild(messageBubble(message));
    list.scrollTop = list.scrollHeight;
  }

  function appendError(query: string, detail: string): void {
    const bubble = document.createElement("div");
    bubble.className = "message error-bubble";
    const text = document.createElement("div");
    text.className = "message-text";
    text.textContent = `request failed: ${detail}`;
    bubble.appendChild(text);
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "retry-button";
    retry.textContent = "retry";
    retry.addEventListener("click", () => {
      bubble.remove();
      void sendQuery(query);
    });
    bubble.appendChild(retry);
    list.appendChild(bubble);
  }

  async function sendQuery(text: string): Promise<void> {
    const query = text.trim();
    if (!query || inFlight) {
      return;
    }
    inFlight = true;
    input.disabled = true;
    refreshSendState();
    append({ role: "user", text: query, timestamp: Date.now() });
    try {
      const response = await client.chat(query);
      append({
        role: "bot",
        text: response.answer,
        sources: response.sources,
        contexts: response.contexts,
        timestamp: Date.now(),
      });
    } catch (err) {
      const detail = err instanceof ChatApiError ? `${err.code}: ${err.message}` : String(err);
      appendError(query, detail);
    } finally {
      inFlight = false;
      input.disabled = false;
      refreshSendState();
      input.focus();
    }
  }

  input.addEventListener("input", refreshSendState);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value;
    if (!text.trim() || inFlight) {
      return; // whitespace-only input cannot be sent
    }
    input.value = "";
    refreshSendState();
    void sendQuery(text);
  });

  return { root, input, sendButton, messages, sendQuery };
}
