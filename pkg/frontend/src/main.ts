import { ChatApiClient } from "./api.js";
import { createChatApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? (window as any).THREATRAG_API_BASE ?? "";

const client = new ChatApiClient(baseUrl);
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
createChatApp(root, client);

const status = document.getElementById("status");
if (status) {
  client
    .health()
    .then((health) => {
      const total = health.stores.reduce((acc, s) => acc + s.count, 0);
      status.textContent = `connected · ${health.stores.length} stores · ${total} records`;
    })
    .catch(() => {
      status.textContent = "engine unreachable";
    });
}
