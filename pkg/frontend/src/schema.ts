/** Wire types of the workbench API (see docs/formats.md in the backend). */

export interface TraceEvent {
  type: string;
  ts: number;
  id: number;
  name?: string;
  candidate?: string;
  tx_started?: boolean;
  tx_id?: string;
  demarcation?: string;
  cause?: string;
  entity_type?: string;
  entity_id?: string;
}

export interface SpanNode {
  name: string;
  start_ts: number;
  end_ts: number;
  overhead_before: number;
  overhead_after: number;
  depth: number;
  parent: number | null;
  event_ids: number[];
}

export interface TxOverlay {
  tx: number;
  tx_id: string;
  state: "clean" | "dirty" | "suspended";
  from_ts: number;
  to_ts: number;
}

export interface TransactionInfo {
  tx_id: string;
  kind: "top_level" | "subordinate";
  demarcation: "implicit" | "explicit";
  status: "committed" | "aborted";
  started_ts: number;
  resolved_ts: number;
  started_event_id: number;
  resolved_event_id: number;
}

export interface Issue {
  kind: string;
  event_id: number;
  entity: { type: string; id: string } | null;
  conflicting_tx_ids: string[];
}

export interface TraceDetailSide {
  duration: number;
  total_overhead: number;
  events: TraceEvent[];
  spans: SpanNode[];
  tx_overlays: TxOverlay[];
  transactions: TransactionInfo[];
  issues: Issue[];
  write_outcomes: Record<string, "COMMITTED" | "REVERTED">;
  tx_started: Record<string, boolean>;
}

export interface TraceDetail {
  trace_id: string;
  use_case: string;
  original: TraceDetailSide;
  rewritten: TraceDetailSide | null;
  mapping: { dropped_original: number[]; inserted_rewritten: number[] } | null;
}

export interface TraceListEntry {
  trace_id: string;
  use_case: string;
  duration: number;
  events: number;
}

export interface WelchBlock {
  t: number | null;
  df: number | null;
  p_value: number;
  mean_delta: number;
  relative_delta: number;
  degenerate: boolean;
}

export interface UseCaseEntry {
  name: string;
  trace_count: number;
  original: { n: number; mean: number; variance: number };
  rewritten: { n: number; mean: number; variance: number };
  welch: WelchBlock | null;
  significant: boolean;
  note: string;
}

export interface OutcomeChange {
  event_id: number;
  entity: { type: string; id: string };
  original: string;
  rewritten: string;
}

export interface TraceDiffEntry {
  trace_id: string;
  use_case: string;
  original_duration: number;
  rewritten_duration: number;
  duration_delta: number;
  new_issues: Issue[];
  vanished_issues: Issue[];
  outcome_changes: OutcomeChange[];
}

export interface Report {
  schema_version: number;
  alpha: number;
  use_cases: UseCaseEntry[];
  traces: TraceDiffEntry[];
  summary: {
    traces: number;
    use_cases: number;
    significant_use_cases: number;
    new_issues: number;
    vanished_issues: number;
    outcome_changes: number;
  };
  microservice_groups: { components: string[]; potential_microservice: boolean }[];
}

export interface Diagnostic {
  severity: "error" | "warning";
  message: string;
  line: number;
  column: number;
  length: number;
}

export function isReport(x: unknown): x is Report {
  const r = x as Report;
  return !!r && r.schema_version === 1 && Array.isArray(r.use_cases) && Array.isArray(r.traces);
}

export function isTraceDetail(x: unknown): x is TraceDetail {
  const d = x as TraceDetail;
  return !!d && typeof d.trace_id === "string" && !!d.original && Array.isArray(d.original.spans);
}
