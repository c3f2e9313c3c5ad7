/**
 * Workbench session state.
 *
 * Holds the acting user, the last-seen project digest, and a mirror of every
 * API document the views render from. All mutations flow through here so the
 * digest discipline lives in one place: each POST carries the digest from the
 * most recent load, a stale rejection reloads before any retry, and at most
 * one mutation is in flight at a time.
 */

import { ApiError } from "./api.js";
import type { WorkbenchApi } from "./api.js";
import type {
  ActorLabel,
  ConflictsDoc,
  CoverageDoc,
  DecisionBody,
  DecisionVerdict,
  GraphDoc,
  IcdDoc,
  PilogDoc,
  ProcessDoc,
  ProposalsDoc,
  ProreqDoc,
  ResolutionBody,
  TraceDoc,
  VersionDoc,
} from "./types.js";

export const STALE_BANNER = "state changed, reloading";

export interface Notice {
  kind: "stale" | "role" | "read_only" | "error";
  text: string;
}

export type Listener = () => void;

/** What the views need from a session; tests substitute plain objects. */
export interface SessionView {
  readonly actor: ActorLabel;
  pilog: PilogDoc | null;
  proposals: ProposalsDoc | null;
  conflicts: ConflictsDoc | null;
  graph: GraphDoc | null;
  coverage: CoverageDoc | null;
  proreq: ProreqDoc | null;
  process: ProcessDoc | null;
  icd: IcdDoc | null;
  trace: TraceDoc | null;
  digest: string;
  readOnly: boolean;
  notice: Notice | null;
  busy: boolean;
  subscribe(listener: Listener): void;
  loadTrace(node: string): Promise<TraceDoc>;
  decide(proposalId: string, verdict: DecisionVerdict, rationale: string): Promise<boolean>;
  resolve(conflictId: string, fields: Omit<ResolutionBody, "digest">): Promise<boolean>;
  dismissNotice(): void;
}

export class WorkbenchSession implements SessionView {
  readonly actor: ActorLabel;

  version: VersionDoc | null = null;
  pilog: PilogDoc | null = null;
  proposals: ProposalsDoc | null = null;
  conflicts: ConflictsDoc | null = null;
  graph: GraphDoc | null = null;
  coverage: CoverageDoc | null = null;
  proreq: ProreqDoc | null = null;
  process: ProcessDoc | null = null;
  icd: IcdDoc | null = null;
  trace: TraceDoc | null = null;

  digest = "";
  readOnly = false;
  notice: Notice | null = null;
  busy = false;

  private readonly api: WorkbenchApi;
  private readonly listeners: Listener[] = [];

  constructor(api: WorkbenchApi, actor: ActorLabel) {
    this.api = api;
    this.actor = actor;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  /** Pull every document the views render from and adopt its digest. */
  async refresh(): Promise<void> {
    const [version, process, pilog, proposals, conflicts, graph, coverage, proreq, icd] =
      await Promise.all([
        this.api.version(),
        this.api.processState(),
        this.api.pilog(),
        this.api.proposals(),
        this.api.conflicts(),
        this.api.graph(),
        this.api.coverage(),
        this.api.proreq(),
        this.api.icd(),
      ]);
    this.version = version;
    this.process = process;
    this.pilog = pilog;
    this.proposals = proposals;
    this.conflicts = conflicts;
    this.graph = graph;
    this.coverage = coverage;
    this.proreq = proreq;
    this.icd = icd;
    this.digest = process.digest;
    this.readOnly = version.read_only === true;
    if (this.readOnly && this.notice === null) {
      this.notice = { kind: "read_only", text: "server is read-only, controls disabled" };
    }
    this.emit();
  }

  /** Poll for upstream edits; a changed digest triggers a silent refresh. */
  async pollOnce(): Promise<void> {
    if (this.busy) {
      return; // never poll across an in-flight mutation
    }
    const process = await this.api.processState();
    if (process.digest !== this.digest) {
      await this.refresh();
    }
  }

  async loadTrace(node: string): Promise<TraceDoc> {
    const doc = await this.api.trace(node);
    this.trace = doc;
    this.emit();
    return doc;
  }

  async decide(proposalId: string, verdict: DecisionVerdict, rationale: string): Promise<boolean> {
    const body: DecisionBody = {
      verdict,
      rationale,
      decided_by: this.actor,
      digest: this.digest,
    };
    return this.mutate(() => this.api.decide(proposalId, body));
  }

  async resolve(
    conflictId: string,
    fields: Omit<ResolutionBody, "digest">,
  ): Promise<boolean> {
    const body: ResolutionBody = { ...fields, digest: this.digest };
    return this.mutate(() => this.api.resolve(conflictId, body));
  }

  dismissNotice(): void {
    this.notice = null;
    this.emit();
  }

  private async mutate(call: () => Promise<ProcessDoc>): Promise<boolean> {
    if (this.busy) {
      return false; // one mutation at a time
    }
    this.busy = true;
    this.emit();
    try {
      await call();
      this.notice = null;
      this.busy = false;
      await this.refresh();
      return true;
    } catch (err) {
      this.busy = false;
      if (err instanceof ApiError && err.code === "stale_digest") {
        this.notice = { kind: "stale", text: STALE_BANNER };
        await this.refresh(); // adopt the current digest before any retry
        return false;
      }
      if (err instanceof ApiError && err.code === "role_violation") {
        this.notice = { kind: "role", text: err.message };
        this.emit();
        return false;
      }
      if (err instanceof ApiError && err.code === "read_only") {
        this.notice = { kind: "read_only", text: "server is read-only, controls disabled" };
        this.emit();
        return false;
      }
      if (err instanceof ApiError) {
        this.notice = { kind: "error", text: err.message };
        this.emit();
        return false;
      }
      this.emit();
      throw err;
    }
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }
}
