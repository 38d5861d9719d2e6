/** Per-iteration metric trend. Values plotted are the gateway's own
 * fractions; the only transformation is percent formatting for labels.
 * A series whose field is missing anywhere in the payload is omitted;
 * the others still render. */

import type { MetricsPayload } from "./types.js";

export const TREND_SERIES = [
  { key: "final_rate", label: "Final" },
  { key: "commonsense_micro", label: "CS micro" },
  { key: "commonsense_macro", label: "CS macro" },
  { key: "hard_micro", label: "Hard micro" },
  { key: "hard_macro", label: "Hard macro" },
] as const;

export type TrendKey = (typeof TREND_SERIES)[number]["key"];

export interface TrendPoint {
  index: number;
  value: number;
  /** payload fraction formatted as a percentage, 2 decimals */
  label: string;
}

export interface TrendSeries {
  key: TrendKey;
  label: string;
  points: TrendPoint[];
}

export interface TrendModel {
  runId: string;
  series: TrendSeries[];
}

export function formatPercent(value: number): string {
  return (value * 100).toFixed(2);
}

export function buildTrend(payload: MetricsPayload): TrendModel {
  const series: TrendSeries[] = [];
  for (const { key, label } of TREND_SERIES) {
    const points: TrendPoint[] = [];
    let complete = true;
    for (const entry of payload.series) {
      const value = entry[key];
      if (typeof value !== "number") {
        complete = false;
        break;
      }
      points.push({ index: entry.index, value, label: formatPercent(value) });
    }
    if (complete && points.length > 0) {
      series.push({ key, label, points });
    }
  }
  return { runId: payload.run_id, series };
}

const WIDTH = 640;
const HEIGHT = 240;
const PAD = 36;
const COLORS: Record<TrendKey, string> = {
  final_rate: "#c0392b",
  commonsense_micro: "#2980b9",
  commonsense_macro: "#5dade2",
  hard_micro: "#27ae60",
  hard_macro: "#82e0aa",
};

function x(position: number, count: number): number {
  if (count <= 1) return WIDTH / 2;
  return PAD + (position * (WIDTH - 2 * PAD)) / (count - 1);
}

function y(value: number): number {
  return HEIGHT - PAD - value * (HEIGHT - 2 * PAD);
}

export function renderTrendSvg(model: TrendModel): string {
  if (model.series.length === 0 || model.series[0].points.length === 0) {
    return '<p class="empty-state">No iterations yet.</p>';
  }
  const parts: string[] = [
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="trend">`,
    `<line x1="${PAD}" y1="${y(0)}" x2="${WIDTH - PAD}" y2="${y(0)}" class="axis"/>`,
    `<line x1="${PAD}" y1="${y(0)}" x2="${PAD}" y2="${y(1)}" class="axis"/>`,
  ];
  for (const series of model.series) {
    const color = COLORS[series.key];
    const count = series.points.length;
    if (count > 1) {
      const coords = series.points
        .map((p, i) => `${x(i, count)},${y(p.value)}`)
        .join(" ");
      parts.push(
        `<polyline points="${coords}" fill="none" stroke="${color}" ` +
          `stroke-width="2" data-series="${series.key}"/>`,
      );
    }
    series.points.forEach((point, i) => {
      parts.push(
        `<circle cx="${x(i, count)}" cy="${y(point.value)}" r="3" ` +
          `fill="${color}" data-series="${series.key}" data-index="${point.index}"/>`,
      );
    });
  }
  // label the first series' endpoints with the payload numbers
  const lead = model.series[0];
  lead.points.forEach((point, i) => {
    parts.push(
      `<text x="${x(i, lead.points.length)}" y="${y(point.value) - 8}" ` +
        `text-anchor="middle" class="point-label">${point.label}</text>`,
    );
  });
  parts.push("</svg>");
  const legend = model.series
    .map(
      (s) =>
        `<span class="legend-item" data-series="${s.key}">` +
        `<span class="swatch" style="background:${COLORS[s.key]}"></span>${s.label}</span>`,
    )
    .join(" ");
  return `<div class="trend-wrap">${parts.join("")}<div class="legend">${legend}</div></div>`;
}
