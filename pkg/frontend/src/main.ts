// Page bootstrap: one session per tab, chart on the left, report panel on
// the right, banners for every failure mode the service can express.

import { ApiClient } from "./api.js";
import { DeviationChart } from "./chart.js";
import { Controller } from "./controller.js";
import { renderReportPanel } from "./panel.js";
import { editPivot, initialState, type UiState } from "./state.js";
import type { PosteriorResponse } from "./types.js";

const api = new ApiClient(""); // same origin as the service
let controller: Controller | null = null;
let chart: DeviationChart | null = null;
let posterior: PosteriorResponse | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function renderBanner(state: UiState): void {
  const banner = el<HTMLDivElement>("banner");
  banner.replaceChildren();
  banner.className = `banner ${state.banner.kind}`;
  if (state.banner.kind === "none") return;
  const message = document.createElement("span");
  if (state.banner.kind === "conflict") {
    message.textContent =
      `This session changed in another tab (server revision ${state.banner.serverRevision}). ` +
      "Reload to pick up the latest pivots; your local edits will be dropped.";
    const reload = document.createElement("button");
    reload.textContent = "Reload pivots";
    reload.addEventListener("click", () => void controller?.reloadFromServer());
    banner.append(message, reload);
    return;
  }
  if (state.banner.kind === "invalid-pivot") {
    const where = state.banner.pivotIndex === null ? "" : ` (pivot #${state.banner.pivotIndex + 1})`;
    message.textContent = `Rejected by the service${where}: ${state.banner.message}`;
    banner.appendChild(message);
    return;
  }
  message.textContent = state.banner.message;
  banner.appendChild(message);
  if (state.banner.retryable) {
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void submit());
    banner.appendChild(retry);
  }
}

function render(state: UiState): void {
  chart?.render(state);
  renderReportPanel(el("report"), state.report, posterior);
  renderBanner(state);
  const submitButton = el<HTMLButtonElement>("submit");
  submitButton.disabled = state.pending;
  submitButton.textContent = state.pending
    ? "Refitting..."
    : state.dirty
      ? "Submit pivots & refit"
      : "Refit";
  el<HTMLSpanElement>("status").textContent =
    `session ${state.sessionId.slice(0, 8)} | revision ${state.revision} | ` +
    `${state.pivots.length} pivots${state.dirty ? " (unsubmitted)" : ""}` +
    `${state.queued ? " | queued" : ""}`;
}

async function submit(): Promise<void> {
  if (!controller) return;
  const fast = el<HTMLInputElement>("fast-toggle").checked;
  await controller.submitAndRefit(fast ? { fast: true } : {});
  if (!fast && controller.state.report && !controller.state.report.partial) {
    posterior = await api.getPosterior(controller.state.sessionId);
  }
  render(controller.state);
}

async function start(): Promise<void> {
  const datasetInput = el<HTMLInputElement>("dataset");
  const session = await api.createSession(datasetInput.value || ".");
  const deviation = await api.getDeviation(session.id);
  const existing = await api.getPivots(session.id);
  posterior = null;
  const state = initialState(
    session.id,
    existing.revision,
    deviation.dates,
    deviation.values,
    existing.pivots,
  );
  controller = new Controller(api, state, render);
  chart = new DeviationChart(el("chart"), (gesture) => {
    if (!controller) return;
    controller.state = editPivot(controller.state, gesture);
    render(controller.state);
  });
  el<HTMLButtonElement>("suggest").addEventListener("click", () => {
    if (!controller) return;
    controller.state = {
      ...controller.state,
      pivots: deviation.suggested_pivots,
      dirty: true,
    };
    render(controller.state);
  });
  el<HTMLButtonElement>("clear").addEventListener("click", () => {
    if (!controller) return;
    controller.state = { ...controller.state, pivots: [], dirty: true };
    render(controller.state);
  });
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submit());
  render(controller.state);
}

el<HTMLButtonElement>("connect").addEventListener("click", () => {
  start().catch((error) => {
    const banner = el<HTMLDivElement>("banner");
    banner.className = "banner error";
    banner.textContent = `Could not start a session: ${error instanceof Error ? error.message : error}`;
  });
});
