// Entry point: wires the base-URL/experiment settings to the two views.

import { ApiClient } from "./api.js";
import { HistoryView } from "./history_view.js";
import { SessionView } from "./session_view.js";

function setting(id: string, fallback: string): string {
  const el = document.getElementById(id) as HTMLInputElement | null;
  const stored = localStorage.getItem(`bact.${id}`);
  if (el && stored && !el.value) el.value = stored;
  const value = el?.value || fallback;
  localStorage.setItem(`bact.${id}`, value);
  return value;
}

let active: { stop?: () => void } | null = null;

function show(view: "session" | "history"): void {
  const root = document.getElementById("view");
  if (!root) return;
  active?.stop?.();
  active = null;
  root.textContent = "";

  const base = setting("api-base", "http://127.0.0.1:8000");
  const experiment = setting("experiment", "exp");
  const api = new ApiClient(base);

  if (view === "session") {
    const sv = new SessionView(root, api, experiment);
    sv.start();
    active = { stop: () => sv.stop() };
  } else {
    const hv = new HistoryView(root, api, experiment);
    void hv.refresh();
    const btn = document.getElementById("refresh");
    btn?.addEventListener("click", () => void hv.refresh());
  }
  document.querySelectorAll("nav a").forEach((a) => {
    a.classList.toggle("active", a.getAttribute("href") === `#/${view}`);
  });
}

function route(): void {
  show(location.hash === "#/history" ? "history" : "session");
}

window.addEventListener("hashchange", route);
document.getElementById("connect")?.addEventListener("click", route);
route();
