/** Candidate board: rows ordered hardest-first by the gateway's rubric
 * numbers, each expandable to full plan text and per-constraint badges.
 * Pure functions — payload in, model/HTML out — so ordering and badge logic
 * are testable without a DOM. */

import type {
  CandidateBoardPayload,
  CandidatePayload,
  ConstraintOutcomePayload,
  RankingPayload,
} from "./types.js";
import { COMMONSENSE_IDS, HARD_IDS } from "./types.js";

export interface Badge {
  constraintId: string;
  status: ConstraintOutcomePayload["status"];
  kind: "commonsense" | "hard" | "unknown";
  message: string;
}

export interface BoardRow {
  planId: string;
  requestText: string;
  planText: string;
  rubricTotal: number | null;
  rubricBreakdown: string | null;
  delivered: boolean | null;
  totalCost: number | null;
  badges: Badge[];
}

export interface BoardModel {
  runId: string;
  iterationIndex: number;
  awaitingSelection: boolean;
  orderedBy: string;
  rows: BoardRow[];
}

function kindOf(constraintId: string): Badge["kind"] {
  if ((COMMONSENSE_IDS as readonly string[]).includes(constraintId)) return "commonsense";
  if ((HARD_IDS as readonly string[]).includes(constraintId)) return "hard";
  return "unknown";
}

function toRow(candidate: CandidatePayload): BoardRow {
  const rubric = candidate.rubric ?? null;
  const report = candidate.report ?? null;
  return {
    planId: candidate.plan_id,
    requestText: candidate.query.raw_text,
    planText: candidate.plan_text,
    rubricTotal: rubric ? rubric.total : null,
    rubricBreakdown: rubric
      ? `days ${rubric.day_points} · cities ${rubric.city_points} · ` +
        `people ${rubric.people_points} · rules ${rubric.room_rule_points} · ` +
        `cuisines ${rubric.cuisine_points} · transport ${rubric.transportation_points}`
      : null,
    delivered: report ? report.delivered : null,
    totalCost: report ? report.total_cost : null,
    badges: (report?.outcomes ?? []).map((outcome) => ({
      constraintId: outcome.constraint_id,
      status: outcome.status,
      kind: kindOf(outcome.constraint_id),
      message: outcome.message,
    })),
  };
}

function rubricRanking(rankings: RankingPayload[]): RankingPayload | null {
  return rankings.find((r) => r.method === "rubric") ?? null;
}

/** Order rows hardest-first. A rubric ranking from the gateway wins; without
 * one, rows sort by their own rubric.total payload field (ties by plan id). */
export function buildBoard(payload: CandidateBoardPayload): BoardModel {
  const rows = payload.candidates.map(toRow);
  const ranking = rubricRanking(payload.rankings);
  let ordered: BoardRow[];
  let orderedBy: string;
  if (ranking) {
    const byId = new Map(rows.map((row) => [row.planId, row]));
    ordered = ranking.ordered_plan_ids
      .map((id) => byId.get(id))
      .filter((row): row is BoardRow => row !== undefined);
    for (const row of rows) {
      if (!ranking.ordered_plan_ids.includes(row.planId)) ordered.push(row);
    }
    orderedBy = "gateway rubric ranking";
  } else {
    ordered = [...rows].sort((a, b) => {
      const at = a.rubricTotal ?? -1;
      const bt = b.rubricTotal ?? -1;
      if (bt !== at) return bt - at;
      return a.planId < b.planId ? -1 : a.planId > b.planId ? 1 : 0;
    });
    orderedBy = "rubric total (hardest first)";
  }
  return {
    runId: payload.run_id,
    iterationIndex: payload.index,
    awaitingSelection: payload.awaiting_selection,
    orderedBy,
    rows: ordered,
  };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function badgeHtml(badge: Badge): string {
  const title = badge.message ? ` title="${escapeHtml(badge.message)}"` : "";
  return (
    `<span class="badge ${badge.status} ${badge.kind}"${title}>` +
    `${escapeHtml(badge.constraintId)}</span>`
  );
}

function rowHtml(row: BoardRow, model: BoardModel): string {
  const commonsense = row.badges.filter((b) => b.kind === "commonsense");
  const hard = row.badges.filter((b) => b.kind !== "commonsense");
  const rubric =
    row.rubricTotal === null
      ? ""
      : `<span class="rubric">difficulty ${row.rubricTotal}</span>` +
        (row.rubricBreakdown
          ? `<span class="rubric-parts">${escapeHtml(row.rubricBreakdown)}</span>`
          : "");
  const cost =
    row.totalCost === null ? "" : `<span class="cost">cost ${row.totalCost.toFixed(2)}</span>`;
  const selectButton = model.awaitingSelection
    ? `<button class="select" data-plan-id="${escapeHtml(row.planId)}">select</button>`
    : "";
  return `
<details class="candidate" data-plan-id="${escapeHtml(row.planId)}">
  <summary>
    <span class="plan-id">${escapeHtml(row.planId)}</span>
    ${rubric}${cost}${selectButton}
  </summary>
  <p class="request">${escapeHtml(row.requestText)}</p>
  <div class="badges commonsense">${commonsense.map(badgeHtml).join("")}</div>
  <div class="badges hard">${hard.map(badgeHtml).join("")}</div>
  <pre class="plan-text">${escapeHtml(row.planText)}</pre>
</details>`;
}

export function renderBoard(model: BoardModel): string {
  if (model.rows.length === 0) {
    return `<p class="empty-state">No candidate plans for iteration ${model.iterationIndex}.</p>`;
  }
  const state = model.awaitingSelection
    ? '<p class="awaiting">Awaiting your selection.</p>'
    : '<p class="locked">Iteration recorded; board is read-only.</p>';
  return (
    `<h2>Run ${escapeHtml(model.runId)} — iteration ${model.iterationIndex}</h2>` +
    `<p class="order-note">ordered by ${escapeHtml(model.orderedBy)}</p>` +
    state +
    model.rows.map((row) => rowHtml(row, model)).join("\n")
  );
}

/** Banner text for fetch failures and selection outcomes — always the
 * server's own words. */
export function errorBanner(source: string, detail: string): string {
  return `<p class="banner error">${escapeHtml(source)}: ${escapeHtml(detail)}</p>`;
}

export function selectionBanner(status: number, detail: string): string {
  const cls = status === 200 ? "ok" : "error";
  return `<p class="banner ${cls}">HTTP ${status}: ${escapeHtml(detail)}</p>`;
}
