/** Collapsible panel of retrieved contexts, rendered exactly in wire order. */

import type { ContextCard } from "./api.js";

export const TRUNCATE_AT = 600;

function card(context: ContextCard, index: number): HTMLElement {
  const item = document.createElement("li");
  item.className = "context-card";
  item.dataset.rank = String(index + 1);

  const header = document.createElement("div");
  header.className = "context-header";
  header.textContent = `#${index + 1} · ${context.store_id} · score ${context.score.toFixed(3)}`;
  item.appendChild(header);

  const body = document.createElement("p");
  body.className = "context-text";
  if (context.text.length > TRUNCATE_AT) {
    body.textContent = context.text.slice(0, TRUNCATE_AT) + "…";
    const toggle = document.createElement("button");
    toggle.type = "button";
    toggle.className = "context-expand";
    toggle.textContent = "show full text";
    let expanded = false;
    toggle.addEventListener("click", () => {
      expanded = !expanded;
      body.textContent = expanded ? context.text : context.text.slice(0, TRUNCATE_AT) + "…";
      toggle.textContent = expanded ? "collapse" : "show full text";
      body.after(toggle);
    });
    item.appendChild(body);
    item.appendChild(toggle);
  } else {
    body.textContent = context.text;
    item.appendChild(body);
  }
  return item;
}

export function renderContexts(contexts: ContextCard[]): HTMLElement {
  if (contexts.length === 0) {
    const notice = document.createElement("div");
    notice.className = "no-context-notice";
    notice.textContent = "no supporting context";
    return notice;
  }
  const panel = document.createElement("details");
  panel.className = "contexts-panel";
  // collapsed by default: no `open` attribute
  const summary = document.createElement("summary");
  summary.textContent = `${contexts.length} retrieved context${contexts.length > 1 ? "s" : ""}`;
  panel.appendChild(summary);

  const list = document.createElement("ol");
  list.className = "context-list";
  contexts.forEach((context, index) => list.appendChild(card(context, index)));
  panel.appendChild(list);
  return panel;
}
