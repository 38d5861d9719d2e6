/** Browser entry point: wires the gateway client, candidate board, and
 * metrics trend to the page. All state lives server-side — closing and
 * reopening this page loses nothing. */

import { GatewayClient, GatewayError } from "./api.js";
import { buildBoard, errorBanner, renderBoard, selectionBanner } from "./board.js";
import { startPolling } from "./poll.js";
import { buildTrend, renderTrendSvg } from "./trend.js";
import type { RunRow } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function gatewayUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("gateway");
  const stored = window.localStorage.getItem("gateway-url");
  return fromQuery ?? stored ?? "http://127.0.0.1:8640";
}

function pickRun(rows: RunRow[]): RunRow | null {
  return rows.find((row) => row.awaiting !== null) ?? rows[rows.length - 1] ?? null;
}

function main(): void {
  const urlInput = el("gateway-input") as HTMLInputElement;
  const banner = el("banner");
  const runsNode = el("runs");
  const boardNode = el("board");
  const trendNode = el("trend");

  urlInput.value = gatewayUrl();
  let client = new GatewayClient(urlInput.value);

  urlInput.addEventListener("change", () => {
    window.localStorage.setItem("gateway-url", urlInput.value);
    client = new GatewayClient(urlInput.value);
  });

  let activeRun: string | null = null;
  let activeIteration: number | null = null;

  boardNode.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    if (!target.matches("button.select")) return;
    event.preventDefault();
    if (activeRun === null || activeIteration === null) return;
    const planId = target.dataset.planId ?? "";
    const note = window.prompt("Optional reviewer note:") ?? undefined;
    const outcome = await client.submitSelection({
      run_id: activeRun,
      iteration_index: activeIteration,
      plan_id: planId,
      note,
    });
    banner.innerHTML = selectionBanner(outcome.status, outcome.detail);
    await refresh();
  });

  async function refresh(): Promise<void> {
    let rows: RunRow[];
    try {
      rows = await client.listRuns();
    } catch (error) {
      const detail =
        error instanceof GatewayError ? error.detail : String(error);
      banner.innerHTML = errorBanner("gateway unreachable", detail);
      return;
    }
    runsNode.innerHTML = rows
      .map((row) => {
        const state = row.awaiting
          ? `awaiting selection (iteration ${row.awaiting.iteration_index})`
          : row.stopped
            ? `finished: ${row.stop_reason ?? "stopped"}`
            : "in progress";
        return `<li><code>${row.run_id}</code> — ${row.iterations} iterations — ${state}</li>`;
      })
      .join("");

    const run = pickRun(rows);
    if (!run) {
      boardNode.innerHTML = '<p class="empty-state">No runs in the store.</p>';
      trendNode.innerHTML = "";
      return;
    }
    activeRun = run.run_id;
    activeIteration = run.awaiting
      ? run.awaiting.iteration_index
      : Math.max(run.iterations, 1);

    try {
      const payload = await client.candidates(activeRun, activeIteration);
      boardNode.innerHTML = renderBoard(buildBoard(payload));
    } catch (error) {
      const detail =
        error instanceof GatewayError ? error.detail : String(error);
      boardNode.innerHTML = errorBanner("candidate board", detail);
    }

    try {
      const metrics = await client.metrics(activeRun);
      trendNode.innerHTML = renderTrendSvg(buildTrend(metrics));
    } catch (error) {
      const detail =
        error instanceof GatewayError ? error.detail : String(error);
      trendNode.innerHTML = errorBanner("metrics trend", detail);
    }
  }

  startPolling(refresh, 2000);
}

main();
