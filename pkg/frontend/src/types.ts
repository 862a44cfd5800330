// Mirrors of the gateway's versioned JSON schemas (/api/v1). The dashboard
// renders only what the gateway provides; no verdict is computed client-side.

export type VerdictKind = "pass" | "partial_pass" | "fail";

export type RunState =
  | "created"
  | "flow_pending"
  | "awaiting_approval"
  | "validating"
  | "debugging"
  | "completed"
  | "aborted";

export interface Verdict {
  kind: VerdictKind;
  matched_assignment: [number, number][];
  missing_steps: number[];
  out_of_order_pairs: [[number, number], [number, number]][];
  inference: string;
}

export interface FlowStep {
  ordinal: number;
  description: string;
  message_name: string | null;
  endpoints: [string, string] | null;
}

export interface FlowEdit {
  operator: string;
  step_ordinal: number;
  before: string;
  after: string;
}

export interface Flow {
  steps: FlowStep[];
  provenance: { doc_id: string; rank: number; chunk_id: string; section: string | null }[];
  approval: "draft" | "pending_approval" | "approved" | "rejected";
  approved_by: string | null;
  edits: FlowEdit[];
  notes: string[];
}

export interface DocReference {
  doc_id: string;
  rank: number;
  excerpt: string;
  section: string | null;
}

export interface ApprovalPayload {
  flow: Flow;
  documents: DocReference[];
}

export interface TestCase {
  id: string;
  title: string;
  category: string;
  components: string[];
  interfaces: string[];
  spec_refs: string[];
  description: string;
  ground_truth_flow: string | null;
  ground_truth_label: string | null;
}

export interface RunSummary {
  run_id: string;
  tc_id: string;
  state: RunState;
  log_origin: string;
  val_verdict: Verdict | null;
  debug_verdict: Verdict | null;
  has_matrix: boolean;
  state_history: string[];
  abort_cause: string | null;
}

export type CellLabel = "executed" | "not_executed" | "unclassified";

export interface MatrixCell {
  step: number;
  log_index: number;
  label: CellLabel;
  confidence: number | null;
  explanation: string | null;
}

export interface MatrixExport {
  version: number;
  m: number;
  n: number;
  rows: MatrixCell[][];
}

export interface VerdictsResponse {
  validation: Verdict | null;
  debug: Verdict | null;
}
