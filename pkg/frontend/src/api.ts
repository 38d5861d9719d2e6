/** Thin fetch client for the review gateway. All reads throw GatewayError on
 * non-2xx; selection submission returns the HTTP outcome instead of throwing
 * because 409/422 are expected reviewer-visible states. */

import type {
  CandidateBoardPayload,
  IterationRecordPayload,
  MetricsPayload,
  RunRow,
  SelectionRequestBody,
} from "./types.js";

export class GatewayError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`gateway responded ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

export interface SelectionOutcome {
  ok: boolean;
  status: number;
  /** server's own words: the accepted body or the error detail */
  detail: string;
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return response.statusText;
  }
}

export class GatewayClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) {
      throw new GatewayError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }

  listRuns(): Promise<RunRow[]> {
    return this.get<RunRow[]>("/runs");
  }

  iterations(runId: string): Promise<IterationRecordPayload[]> {
    return this.get<IterationRecordPayload[]>(
      `/runs/${encodeURIComponent(runId)}/iterations`,
    );
  }

  metrics(runId: string): Promise<MetricsPayload> {
    return this.get<MetricsPayload>(`/runs/${encodeURIComponent(runId)}/metrics`);
  }

  candidates(runId: string, index: number): Promise<CandidateBoardPayload> {
    return this.get<CandidateBoardPayload>(
      `/iterations/${encodeURIComponent(runId)}:${index}/candidates`,
    );
  }

  async submitSelection(body: SelectionRequestBody): Promise<SelectionOutcome> {
    const response = await fetch(this.baseUrl + "/selection", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.ok) {
      const accepted = (await response.json()) as { status: string };
      return { ok: true, status: response.status, detail: accepted.status };
    }
    return { ok: false, status: response.status, detail: await detailOf(response) };
  }
}
