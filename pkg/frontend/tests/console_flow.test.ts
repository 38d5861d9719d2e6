/** End-to-end review flow against the real gateway: a human-mode run is
 * spawned with a replayed model transcript, then the console's own client and
 * rendering code drive the full reviewer journey — board, selection,
 * duplicate rejection, and metrics trend. */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import type { AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { buildBoard, renderBoard, selectionBanner } from "../src/board.js";
import { buildTrend, renderTrendSvg } from "../src/trend.js";
import type { MetricsPayload, RunRow } from "../src/types.js";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.on("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const { port } = probe.address() as AddressInfo;
      probe.close(() => resolve(port));
    });
  });
}

let workdir: string;
let child: ChildProcess;
let childOutput = "";
let client: GatewayClient;

async function until<T>(
  poll: () => Promise<T | null>,
  what: string,
  timeoutMs = 30_000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(
        `gateway process exited with code ${child.exitCode} while waiting for ${what}\n${childOutput}`,
      );
    }
    try {
      const value = await poll();
      if (value !== null) return value;
    } catch (error) {
      lastError = error; // gateway may not be listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(
    `timed out waiting for ${what}` +
      (lastError ? `; last error: ${String(lastError)}` : "") +
      `\n${childOutput}`,
  );
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "console-flow-"));
  const fixtureDir = join(workdir, "fixture");
  const storeDir = join(workdir, "runs");
  execFileSync("python3", [
    "-c",
    "import sys; from planloop.fixtures import write_loop_fixture; write_loop_fixture(sys.argv[1])",
    fixtureDir,
  ]);
  const port = await freePort();
  child = spawn("python3", [
    "-m",
    "planloop.cli",
    "run-loop",
    "--sandbox", join(fixtureDir, "archive.json"),
    "--queries", join(fixtureDir, "queries.ndjson"),
    "--candidates", join(fixtureDir, "candidates.json"),
    "--skeleton", join(fixtureDir, "skeleton.json"),
    "--store", storeDir,
    "--run-id", "console",
    "--mode", "human",
    "--max-iterations", "1",
    "--stub-transcript", join(fixtureDir, "transcript.ndjson"),
    "--serve-port", String(port),
  ]);
  child.stdout?.on("data", (chunk: Buffer) => (childOutput += chunk.toString()));
  child.stderr?.on("data", (chunk: Buffer) => (childOutput += chunk.toString()));
  client = new GatewayClient(`http://127.0.0.1:${port}`);
});

afterAll(async () => {
  if (child && child.exitCode === null) {
    const exited = new Promise<void>((resolve) => child.once("exit", () => resolve()));
    child.kill("SIGTERM");
    await Promise.race([
      exited,
      new Promise<void>((resolve) => setTimeout(resolve, 5_000)),
    ]);
    if (child.exitCode === null) child.kill("SIGKILL");
  }
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("review console against a live gateway", () => {
  it("sees the run paused and awaiting a reviewer", async () => {
    const run: RunRow = await until(async () => {
      const runs = await client.listRuns();
      return runs.find((r) => r.run_id === "console" && r.awaiting !== null) ?? null;
    }, "a run awaiting selection");
    expect(run.awaiting?.iteration_index).toBe(1);
    expect([...(run.awaiting?.candidate_plan_ids ?? [])].sort()).toEqual([
      "cand-a",
      "cand-b",
      "cand-c",
    ]);
  });

  it("lists the fixture candidates hardest-first with full review material", async () => {
    const payload = await client.candidates("console", 1);
    const board = buildBoard(payload);
    expect(board.awaitingSelection).toBe(true);
    expect(board.rows.map((row) => row.planId)).toEqual(["cand-c", "cand-b", "cand-a"]);
    expect(board.rows.map((row) => row.rubricTotal)).toEqual([5, 2, 0]);
    for (const row of board.rows) {
      expect(row.badges).toHaveLength(13);
      expect(row.delivered).toBe(true);
      expect(row.planText.length).toBeGreaterThan(0);
    }
    const html = renderBoard(board);
    expect(html).toContain("Awaiting your selection.");
    expect(html).toContain('data-plan-id="cand-c"');
    expect(html.match(/<button class="select"/g)).toHaveLength(3);
  });

  it("accepts a submitted selection and records it in the iteration", async () => {
    const outcome = await client.submitSelection({
      run_id: "console",
      iteration_index: 1,
      plan_id: "cand-b",
      note: "picked from the console",
    });
    expect(outcome).toEqual({ ok: true, status: 200, detail: "accepted" });
    expect(selectionBanner(outcome.status, outcome.detail)).toContain("HTTP 200: accepted");

    const record = await until(async () => {
      const records = await client.iterations("console");
      return records.find((r) => r.index === 1 && r.selected_plan_id !== null) ?? null;
    }, "the recorded iteration");
    expect(record.selected_plan_id).toBe("cand-b");
    expect(record.reviewer_note).toBe("picked from the console");
    expect(record.stopped).toBe(true);
    expect(record.stop_reason).toBe("max-iterations");
    const rubric = record.rankings.find((r) => r.method === "rubric");
    expect(rubric?.ordered_plan_ids).toEqual(["cand-c", "cand-b", "cand-a"]);
  });

  it("rejects a duplicate submission with 409 and the server's words", async () => {
    const duplicate = await client.submitSelection({
      run_id: "console",
      iteration_index: 1,
      plan_id: "cand-a",
    });
    expect(duplicate.ok).toBe(false);
    expect(duplicate.status).toBe(409);
    expect(duplicate.detail).toContain("already has a selection");
    expect(selectionBanner(duplicate.status, duplicate.detail)).toContain("HTTP 409");
  });

  it("keeps the recorded board readable after the run ends", async () => {
    const board = await until(async () => {
      const payload = await client.candidates("console", 1);
      return payload.awaiting_selection ? null : buildBoard(payload);
    }, "the read-only board");
    expect(board.rows.map((row) => row.planId)).toEqual(["cand-c", "cand-b", "cand-a"]);
    const html = renderBoard(board);
    expect(html).toContain("read-only");
    expect(html).not.toContain('<button class="select"');
  });

  it("renders the metrics trend from the gateway's own numbers", async () => {
    const metrics = await until(async () => {
      const payload = await client.metrics("console");
      return payload.series.length > 0 ? payload : null;
    }, "the metrics series");
    const trend = buildTrend(metrics);
    const final = trend.series.find((s) => s.key === "final_rate");
    expect(final?.points.map((p) => p.label)).toEqual(["50.00"]);
    expect(renderTrendSvg(trend)).toContain("<circle");
  });

  it("renders the published improvement series 5.55 → 7.78", () => {
    const fixture: MetricsPayload = {
      run_id: "published",
      series: [
        {
          index: 1, stopped: false, stop_reason: null,
          delivery_rate: 1.0, commonsense_micro: 0.6, commonsense_macro: 0.3,
          hard_micro: 0.5, hard_macro: 0.4, final_rate: 0.0555,
        },
        {
          index: 2, stopped: true, stop_reason: "max-iterations",
          delivery_rate: 1.0, commonsense_micro: 0.7, commonsense_macro: 0.4,
          hard_micro: 0.6, hard_macro: 0.5, final_rate: 0.0778,
        },
      ],
    };
    const trend = buildTrend(fixture);
    const final = trend.series.find((s) => s.key === "final_rate");
    expect(final?.points.map((p) => p.label)).toEqual(["5.55", "7.78"]);
    const svg = renderTrendSvg(trend);
    expect(svg).toContain(">5.55</text>");
    expect(svg).toContain(">7.78</text>");
    expect(svg).toContain("<polyline");
  });
});
