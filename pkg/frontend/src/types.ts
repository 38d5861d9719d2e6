/** Gateway payload shapes. The console renders these verbatim — it never
 * computes a metric or score itself. */

export interface AwaitingInfo {
  iteration_index: number;
  candidate_plan_ids: string[];
}

export interface RunRow {
  run_id: string;
  iterations: number;
  stopped: boolean;
  stop_reason: string | null;
  awaiting: AwaitingInfo | null;
}

export interface BatchMetricsPayload {
  delivery_rate: number;
  commonsense_micro: number;
  commonsense_macro: number;
  hard_micro: number;
  hard_macro: number;
  final_rate: number;
}

export interface RankingPayload {
  method: string;
  ordered_plan_ids: string[];
  scores: number[];
}

export interface IterationRecordPayload {
  type: "iteration";
  index: number;
  prompt_digest: string;
  metrics: BatchMetricsPayload;
  rankings: RankingPayload[];
  selected_plan_id: string | null;
  selected_example: [string, string] | null;
  reviewer_note: string | null;
  stopped: boolean;
  stop_reason: string | null;
  next_prompt_digest: string | null;
}

export interface ConstraintOutcomePayload {
  constraint_id: string;
  status: "pass" | "fail" | "not-applicable";
  message: string;
}

export interface EvaluationReportPayload {
  query_id: string;
  delivered: boolean;
  total_cost: number | null;
  outcomes: ConstraintOutcomePayload[];
}

export interface RubricPayload {
  query_id: string;
  day_points: number;
  city_points: number;
  people_points: number;
  room_rule_points: number;
  cuisine_points: number;
  transportation_points: number;
  total: number;
}

export interface QueryPayload {
  id: string;
  origin_city: string;
  duration_days: number;
  people: number;
  budget: number;
  raw_text: string;
  destinations?: string[];
  region?: string;
  required_city_count?: number;
  room_rules?: string[];
  room_type?: string;
  cuisines?: string[];
  transportation_request?: string;
}

export interface CandidatePayload {
  plan_id: string;
  plan_text: string;
  query: QueryPayload;
  rubric?: RubricPayload;
  report?: EvaluationReportPayload;
}

export interface CandidateBoardPayload {
  iteration_id: string;
  run_id: string;
  index: number;
  awaiting_selection: boolean;
  candidates: CandidatePayload[];
  rankings: RankingPayload[];
}

export interface MetricsSeriesEntry extends Partial<BatchMetricsPayload> {
  index: number;
  stopped: boolean;
  stop_reason: string | null;
}

export interface MetricsPayload {
  run_id: string;
  series: MetricsSeriesEntry[];
}

export interface SelectionRequestBody {
  run_id: string;
  iteration_index: number;
  plan_id: string;
  note?: string;
}

/** The gateway's fixed constraint catalog, mirrored for display grouping.
 * Order matches report payloads. */
export const COMMONSENSE_IDS = [
  "within-sandbox",
  "complete-information",
  "within-current-city",
  "reasonable-city-route",
  "diverse-restaurants",
  "diverse-attractions",
  "non-conflicting-transportation",
  "minimum-nights",
] as const;

export const HARD_IDS = [
  "budget",
  "room-rules",
  "room-type",
  "cuisines",
  "transportation-request",
] as const;
