/**
 * Thin typed client for the workbench API.
 * Every mutation carries the caller's last-seen digest; errors are decoded
 * into ApiError so the session layer can react to stale or forbidden calls.
 */

import type {
  ApiErrorDoc,
  ConflictsDoc,
  CoverageDoc,
  DecisionBody,
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

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly digest: string;

  constructor(doc: ApiErrorDoc) {
    super(doc.message);
    this.status = doc.status;
    this.code = doc.code;
    this.digest = doc.digest;
  }
}

/** Surface the session layer depends on; tests substitute stubs. */
export interface WorkbenchApi {
  version(): Promise<VersionDoc>;
  pilog(): Promise<PilogDoc>;
  proposals(): Promise<ProposalsDoc>;
  conflicts(): Promise<ConflictsDoc>;
  graph(): Promise<GraphDoc>;
  coverage(): Promise<CoverageDoc>;
  trace(node: string): Promise<TraceDoc>;
  proreq(): Promise<ProreqDoc>;
  processState(): Promise<ProcessDoc>;
  icd(): Promise<IcdDoc>;
  decide(proposalId: string, body: DecisionBody): Promise<ProcessDoc>;
  resolve(conflictId: string, body: ResolutionBody): Promise<ProcessDoc>;
}

export class ApiClient implements WorkbenchApi {
  private readonly base: string;

  constructor(baseUrl: string) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  version(): Promise<VersionDoc> {
    return this.get("/api/version");
  }

  pilog(): Promise<PilogDoc> {
    return this.get("/api/pilog");
  }

  proposals(): Promise<ProposalsDoc> {
    return this.get("/api/proposals");
  }

  conflicts(): Promise<ConflictsDoc> {
    return this.get("/api/conflicts");
  }

  graph(): Promise<GraphDoc> {
    return this.get("/api/graph");
  }

  coverage(): Promise<CoverageDoc> {
    return this.get("/api/coverage");
  }

  trace(node: string): Promise<TraceDoc> {
    return this.get(`/api/trace/${encodeURIComponent(node)}`);
  }

  proreq(): Promise<ProreqDoc> {
    return this.get("/api/proreq");
  }

  processState(): Promise<ProcessDoc> {
    return this.get("/api/process/state");
  }

  icd(): Promise<IcdDoc> {
    return this.get("/api/icd");
  }

  decide(proposalId: string, body: DecisionBody): Promise<ProcessDoc> {
    return this.post(`/api/proposals/${encodeURIComponent(proposalId)}/decision`, body);
  }

  resolve(conflictId: string, body: ResolutionBody): Promise<ProcessDoc> {
    return this.post(`/api/conflicts/${encodeURIComponent(conflictId)}/resolution`, body);
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    return this.decode<T>(response);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.decode<T>(response);
  }

  private async decode<T>(response: Response): Promise<T> {
    const doc: unknown = await response.json();
    if (!response.ok) {
      throw new ApiError(doc as ApiErrorDoc);
    }
    return doc as T;
  }
}
