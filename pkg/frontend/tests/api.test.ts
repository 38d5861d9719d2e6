import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { AddressInfo } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient, GatewayError } from "../src/api.js";

const RUNS = [
  {
    run_id: "console",
    iterations: 1,
    stopped: false,
    stop_reason: null,
    awaiting: { iteration_index: 1, candidate_plan_ids: ["cand-a", "cand-b"] },
  },
];

const ITERATIONS = [
  {
    type: "iteration",
    index: 1,
    prompt_digest: "abc",
    metrics: {
      delivery_rate: 0.5,
      commonsense_micro: 1.0,
      commonsense_macro: 0.5,
      hard_micro: 1.0,
      hard_macro: 0.5,
      final_rate: 0.5,
    },
    rankings: [],
    selected_plan_id: "cand-b",
    selected_example: null,
    reviewer_note: null,
    stopped: false,
    stop_reason: null,
    next_prompt_digest: "def",
  },
];

const METRICS = {
  run_id: "console",
  series: [
    {
      index: 1,
      stopped: false,
      stop_reason: null,
      delivery_rate: 0.5,
      commonsense_micro: 1.0,
      commonsense_macro: 0.5,
      hard_micro: 1.0,
      hard_macro: 0.5,
      final_rate: 0.5,
    },
  ],
};

const BOARD = {
  iteration_id: "console:1",
  run_id: "console",
  index: 1,
  awaiting_selection: true,
  candidates: [],
  rankings: [],
};

function respond(res: ServerResponse, status: number, payload: unknown): void {
  res.writeHead(status, { "Content-Type": "application/json" });
  res.end(JSON.stringify(payload));
}

function route(req: IncomingMessage, res: ServerResponse, body: string): void {
  const url = req.url ?? "";
  if (req.method === "GET") {
    if (url === "/runs") return respond(res, 200, RUNS);
    if (url === "/runs/console/iterations") return respond(res, 200, ITERATIONS);
    if (url === "/runs/console/metrics") return respond(res, 200, METRICS);
    if (url === "/iterations/console%3A1/candidates" || url === "/iterations/console:1/candidates") {
      return respond(res, 200, BOARD);
    }
    return respond(res, 404, { detail: `unknown path ${url}` });
  }
  if (req.method === "POST" && url === "/selection") {
    const parsed = JSON.parse(body) as { plan_id: string };
    if (parsed.plan_id === "cand-b") {
      return respond(res, 200, { status: "accepted", run_id: "console", iteration_index: 1, plan_id: "cand-b" });
    }
    if (parsed.plan_id === "cand-dup") {
      return respond(res, 409, { detail: "iteration 1 of run 'console' already has a selection" });
    }
    return respond(res, 422, { detail: `plan '${parsed.plan_id}' is not a candidate for iteration 1` });
  }
  return respond(res, 404, { detail: "not found" });
}

let server: Server;
let client: GatewayClient;

beforeAll(async () => {
  server = createServer((req, res) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk: Buffer) => chunks.push(chunk));
    req.on("end", () => route(req, res, Buffer.concat(chunks).toString("utf8")));
  });
  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const { port } = server.address() as AddressInfo;
  client = new GatewayClient(`http://127.0.0.1:${port}/`);
});

afterAll(async () => {
  await new Promise<void>((resolve, reject) =>
    server.close((err) => (err ? reject(err) : resolve())),
  );
});

describe("GatewayClient reads", () => {
  it("strips trailing slashes from the base URL", () => {
    expect(client.baseUrl.endsWith("/")).toBe(false);
  });

  it("lists runs with their awaiting state", async () => {
    const runs = await client.listRuns();
    expect(runs).toHaveLength(1);
    expect(runs[0].run_id).toBe("console");
    expect(runs[0].awaiting?.iteration_index).toBe(1);
  });

  it("fetches iteration records", async () => {
    const records = await client.iterations("console");
    expect(records).toHaveLength(1);
    expect(records[0].selected_plan_id).toBe("cand-b");
    expect(records[0].metrics.final_rate).toBe(0.5);
  });

  it("fetches the metrics series", async () => {
    const metrics = await client.metrics("console");
    expect(metrics.run_id).toBe("console");
    expect(metrics.series[0].final_rate).toBe(0.5);
  });

  it("fetches the candidate board by run and iteration index", async () => {
    const board = await client.candidates("console", 1);
    expect(board.iteration_id).toBe("console:1");
    expect(board.awaiting_selection).toBe(true);
  });

  it("throws GatewayError carrying the server's detail on 404", async () => {
    await expect(client.iterations("missing")).rejects.toThrowError(GatewayError);
    try {
      await client.iterations("missing");
      expect.unreachable("request should have failed");
    } catch (error) {
      const gatewayError = error as GatewayError;
      expect(gatewayError.status).toBe(404);
      expect(gatewayError.detail).toContain("/runs/missing/iterations");
    }
  });
});

describe("GatewayClient selection outcomes", () => {
  it("reports an accepted selection with the server's status word", async () => {
    const outcome = await client.submitSelection({
      run_id: "console",
      iteration_index: 1,
      plan_id: "cand-b",
    });
    expect(outcome).toEqual({ ok: true, status: 200, detail: "accepted" });
  });

  it("surfaces a duplicate selection as a 409 outcome instead of throwing", async () => {
    const outcome = await client.submitSelection({
      run_id: "console",
      iteration_index: 1,
      plan_id: "cand-dup",
    });
    expect(outcome.ok).toBe(false);
    expect(outcome.status).toBe(409);
    expect(outcome.detail).toContain("already has a selection");
  });

  it("surfaces an unknown plan as a 422 outcome with the server's detail", async () => {
    const outcome = await client.submitSelection({
      run_id: "console",
      iteration_index: 1,
      plan_id: "nope",
    });
    expect(outcome.ok).toBe(false);
    expect(outcome.status).toBe(422);
    expect(outcome.detail).toBe("plan 'nope' is not a candidate for iteration 1");
  });
});
