/**
 * Wire types for the piforge workbench API.
 * Field names and shapes mirror the server's canonical JSON documents.
 */

export interface ActorLabel {
  role: string;
  name: string;
}

export interface UncertaintyDoc {
  kind: string;
  magnitude?: number;
  note?: string;
}

export interface PiDoc {
  id: string;
  description: string;
  unit: string;
  range: [number, number];
  perspective: string;
  proposed_by: ActorLabel[];
  provider: string;
  rate_hz: number;
  payload_bits_declared: number;
  freshness_s: number;
  uncertainty: UncertaintyDoc;
  traces: string[];
  proxy_for: string | null;
  integral: boolean;
  merged_from: string[];
}

export interface PilogDoc {
  digest: string;
  pis: PiDoc[];
}

export interface ProposalDoc {
  id: string;
  candidates: [string, string];
  suggested_canonical: string;
  score: number;
  reasons: string[];
}

export interface ProposalsDoc {
  digest: string;
  proposals: ProposalDoc[];
}

export interface ConflictDoc {
  id: string;
  pi: string;
  reason: string;
  affected: string[];
}

export interface ConflictsDoc {
  digest: string;
  conflicts: ConflictDoc[];
}

export interface GraphNodeDoc {
  id: string;
  kind: string;
}

export interface GraphEdgeDoc {
  from: string;
  kind: string;
  to: string;
  note: string;
}

export interface GraphDoc {
  digest: string;
  nodes: GraphNodeDoc[];
  edges: GraphEdgeDoc[];
}

export interface CoverageDoc {
  digest: string;
  clean: boolean;
  orphan_pis: string[];
  unmonitored_requirements: string[];
  unobserved_failure_modes: string[];
}

export interface TraceDoc {
  digest: string;
  pi: string;
  perspective: string;
  proposed_by: ActorLabel[];
  paths: string[][];
}

export interface ProreqEntryDoc {
  id: number;
  satisfied: boolean;
  evidence: string;
}

export interface ProreqDoc {
  digest: string;
  entries: ProreqEntryDoc[];
}

export interface InterfaceDoc {
  id: string;
  pi: string;
  provider_service: string;
  bus: string;
  encoding: string;
  rate_hz: number;
  payload_bits: number;
  freshness_s: number;
  status: string;
}

export interface ProcessDoc {
  digest: string;
  phase: string;
  top_down_done: boolean;
  bottom_up_done: boolean;
  harmonization_iteration: number;
  interface_iteration: number;
  threshold: number;
  warn_utilization: number;
  suppressions: [string, string][];
  decisions: number;
  open_conflicts: number;
  interfaces: InterfaceDoc[];
}

export interface IcdDoc {
  digest: string;
  icd: string | null;
  idl: string | null;
}

export interface VersionDoc {
  name: string;
  schema: number;
  digest?: string;
  read_only?: boolean;
}

export interface ApiErrorDoc {
  status: number;
  code: string;
  message: string;
  digest: string;
}

export type DecisionVerdict = "merge" | "keep_separate";

export interface DecisionBody {
  verdict: DecisionVerdict;
  rationale: string;
  decided_by: ActorLabel;
  digest: string;
}

export type ResolutionKind = "adjust_pi" | "reallocate_bus" | "drop_pi";

export interface ResolutionBody {
  kind: ResolutionKind;
  rationale: string;
  actors: ActorLabel[];
  digest: string;
  new_rate_hz?: number;
  new_payload_bits?: number;
  new_freshness_s?: number;
  target_bus?: string;
}
