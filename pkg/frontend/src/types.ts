/**
 * Wire types for the elicitation service.
 *
 * Histories are arrays of [observation, action] pairs (action null for
 * designer-side observations); lottery weights are exact "num/den"
 * strings. Every number the UI displays originates from these payloads.
 */

export type TransitionObj = [string, string | null];
export type HistoryObj = TransitionObj[];

export interface LotteryObj {
  weights: [HistoryObj, string][];
}

export interface OutcomeRendering {
  history: string;
  weight: string;
  percent: string;
  percent_exact: boolean;
}

export interface LotteryView {
  lottery: LotteryObj;
  rendering: { outcomes: OutcomeRendering[] };
}

export interface PendingQuery {
  index: number;
  left: LotteryView;
  right: LotteryView;
}

export type Verdict = "strictly-less" | "indifferent" | "strictly-greater";

export interface WitnessComparison {
  query_index: number;
  left: LotteryObj;
  right: LotteryObj;
  verdict: string;
}

export interface Inconsistency {
  kind: string;
  message: string;
  witness: WitnessComparison[] | Record<string, unknown> | null;
}

export interface RewardSpecObj {
  rewards: [TransitionObj, number][];
  discounts: [TransitionObj, number][];
  identifiable: [TransitionObj, boolean][];
  scale: number | null;
  relaxed: boolean;
}

export interface DiagnosticsObj {
  comparisons: number;
  identifiable: [TransitionObj, boolean][];
  scale: number | null;
  scale_residual: number | null;
  bisection_iterations: Record<string, number>;
  degenerate_transitions: string[];
  auxiliary_probes: string[];
  gamma_clamped: string[];
  monotonicity_warnings: unknown[];
  axiom_checks_passed: number;
  notes: string[];
}

export interface SessionResult {
  reward_spec: RewardSpecObj;
  diagnostics: DiagnosticsObj;
}

export interface AlphabetObj {
  observations: string[];
  actions: string[] | null;
}

export interface SessionView {
  id: string;
  status: "awaiting-answer" | "computing" | "complete" | "inconsistent";
  alphabet: AlphabetObj;
  epsilon: number;
  budget: number | null;
  answered: number;
  rejected: number;
  estimated_total: number;
  pending_query: PendingQuery | null;
  inconsistency: Inconsistency | null;
  result: SessionResult | null;
}

export interface CreateSessionResponse {
  id: string;
  pending_query: PendingQuery | null;
  estimated_total: number;
}

export type ResultResponse =
  | ({ status: "complete" } & SessionResult)
  | { status: "inconsistent"; inconsistency: Inconsistency };
