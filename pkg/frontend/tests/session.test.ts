/**
 * WorkbenchSession: digest discipline, the stale-reload path, role and
 * read-only notices, and the single-mutation gate.
 */

import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import type { WorkbenchApi } from "../src/api.js";
import { STALE_BANNER, WorkbenchSession } from "../src/session.js";
import type {
  ConflictsDoc,
  CoverageDoc,
  GraphDoc,
  IcdDoc,
  PilogDoc,
  ProcessDoc,
  ProposalsDoc,
  ProreqDoc,
  TraceDoc,
  VersionDoc,
} from "../src/types.js";
import { buildConflictProject, rawGet, rawPost, serveProject, stopServer } from "./helpers.js";
import type { RunningServer } from "./helpers.js";

const DRAFT_DIGEST = "454d4db4945264a15eb9d968625e0531620287363917af59b8c4db00331e4835";
const CONFLICT_DIGEST = "b91bc9ce2bcbf6cb50f3cbffbcbd29ea358534f38e7e627db78568a245ad078a";

const COORDINATOR = { role: "self_perception_coordinator", name: "Alex Chen" };

const servers: RunningServer[] = [];

async function liveSession(
  options: { readOnly?: boolean } = {},
): Promise<{ session: WorkbenchSession; server: RunningServer }> {
  const project = join(mkdtempSync(join(tmpdir(), "piforge-session-")), "project");
  buildConflictProject(project);
  const server = await serveProject(project, options);
  servers.push(server);
  const session = new WorkbenchSession(new ApiClient(server.base), COORDINATOR);
  await session.refresh();
  return { session, server };
}

afterEach(async () => {
  while (servers.length > 0) {
    await stopServer(servers.pop()!);
  }
});

describe("WorkbenchSession against a live server", () => {
  it("mirrors every document and adopts the digest", async () => {
    const { session } = await liveSession();
    expect(session.digest).toBe(DRAFT_DIGEST);
    expect(session.process?.phase).toBe("pi_log_draft");
    expect(session.pilog?.pis).toHaveLength(3);
    expect(session.proposals?.proposals).toHaveLength(1);
    expect(session.conflicts?.conflicts).toHaveLength(0);
    expect(session.graph?.nodes.length).toBeGreaterThan(0);
    expect(session.coverage?.clean).toBe(true);
    expect(session.proreq?.entries).toHaveLength(7);
    expect(session.icd).not.toBeNull();
    expect(session.readOnly).toBe(false);
    expect(session.notice).toBeNull();
  });

  it("a merge decision carries the digest and lands in conflict_resolution", async () => {
    const { session } = await liveSession();
    const ok = await session.decide("MP-97697f75", "merge", "same saturation effect, one entry suffices");
    expect(ok).toBe(true);
    expect(session.digest).toBe(CONFLICT_DIGEST);
    expect(session.process?.phase).toBe("conflict_resolution");
    expect(session.conflicts?.conflicts.map((c) => c.id)).toEqual([
      "C-diag.cpu_load",
      "C-diag.latency",
    ]);
    expect(session.notice).toBeNull();
  });

  it("a stale mutation shows the reload banner and refreshes before retry", async () => {
    const { session, server } = await liveSession();
    const decided = await rawPost(server.base, "/api/proposals/MP-97697f75/decision", {
      verdict: "merge",
      rationale: "same saturation effect, one entry suffices",
      decided_by: COORDINATOR,
      digest: DRAFT_DIGEST,
    });
    expect(decided.status).toBe(200);
    await session.refresh();
    expect(session.digest).toBe(CONFLICT_DIGEST);

    // someone else settles the first conflict out of band
    const signers = [
      { role: "self_perception_coordinator", name: "Alex Chen" },
      { role: "architectural_system_engineer", name: "Noor Haddad" },
    ];
    const outOfBand = await rawPost(server.base, "/api/conflicts/C-diag.cpu_load/resolution", {
      kind: "adjust_pi",
      rationale: "halve the reporting rate to fit the link",
      actors: signers,
      digest: CONFLICT_DIGEST,
      new_rate_hz: 5,
    });
    expect(outOfBand.status).toBe(200);
    expect(session.digest).toBe(CONFLICT_DIGEST); // still the stale view

    const fields = {
      kind: "adjust_pi" as const,
      rationale: "halve the reporting rate to fit the link",
      actors: signers,
      new_rate_hz: 5,
    };
    const ok = await session.resolve("C-diag.latency", fields);
    expect(ok).toBe(false);
    expect(session.notice).toEqual({ kind: "stale", text: STALE_BANNER });
    expect(session.digest).not.toBe(CONFLICT_DIGEST); // reloaded, ready for retry
    expect(session.conflicts?.conflicts.map((c) => c.id)).toEqual(["C-diag.latency"]);

    const retried = await session.resolve("C-diag.latency", fields);
    expect(retried).toBe(true);
    expect(session.process?.phase).toBe("interfaces_defined");
  });

  it("polling picks up upstream edits by digest", async () => {
    const { session, server } = await liveSession();
    await session.pollOnce();
    expect(session.digest).toBe(DRAFT_DIGEST); // unchanged, no refresh needed
    await rawPost(server.base, "/api/proposals/MP-97697f75/decision", {
      verdict: "merge",
      rationale: "same saturation effect, one entry suffices",
      decided_by: COORDINATOR,
      digest: DRAFT_DIGEST,
    });
    await session.pollOnce();
    expect(session.digest).toBe(CONFLICT_DIGEST);
    expect(session.conflicts?.conflicts).toHaveLength(2);
  });

  it("a role violation surfaces as a notice, not a reload", async () => {
    const project = join(mkdtempSync(join(tmpdir(), "piforge-session-")), "project");
    buildConflictProject(project);
    const server = await serveProject(project);
    servers.push(server);
    const expert = new WorkbenchSession(new ApiClient(server.base), {
      role: "function_expert",
      name: "Jonas Weber",
    });
    await expert.refresh();
    const ok = await expert.decide("MP-97697f75", "merge", "not my call");
    expect(ok).toBe(false);
    expect(expert.notice?.kind).toBe("role");
    expect(expert.notice?.text).toContain("self perception coordinator");
    expect(expert.digest).toBe(DRAFT_DIGEST); // state untouched
    const current = (await rawGet(server.base, "/api/process/state")) as ProcessDoc;
    expect(current.phase).toBe("pi_log_draft");
  });

  it("a read-only server disables the session and says so", async () => {
    const { session } = await liveSession({ readOnly: true });
    expect(session.readOnly).toBe(true);
    expect(session.notice?.kind).toBe("read_only");
    const ok = await session.decide("MP-97697f75", "merge", "should be refused");
    expect(ok).toBe(false);
    expect(session.notice?.kind).toBe("read_only");
  });

  it("loads origin traces on demand", async () => {
    const { session } = await liveSession();
    const trace = await session.loadTrace("diag.latency");
    expect(trace.paths).toContainEqual(["diag.latency", "SR-101", "SCN-101"]);
    expect(session.trace).toBe(trace);
  });
});

// Stub with hand-rolled promises to pin down the one-mutation gate.
class StubApi implements WorkbenchApi {
  decideCalls = 0;
  releaseDecide: (() => void) | null = null;
  sentDigests: string[] = [];

  private readonly digest = "d".repeat(64);

  version(): Promise<VersionDoc> {
    return Promise.resolve({ name: "piforge", schema: 1, digest: this.digest, read_only: false });
  }
  pilog(): Promise<PilogDoc> {
    return Promise.resolve({ digest: this.digest, pis: [] });
  }
  proposals(): Promise<ProposalsDoc> {
    return Promise.resolve({ digest: this.digest, proposals: [] });
  }
  conflicts(): Promise<ConflictsDoc> {
    return Promise.resolve({ digest: this.digest, conflicts: [] });
  }
  graph(): Promise<GraphDoc> {
    return Promise.resolve({ digest: this.digest, nodes: [], edges: [] });
  }
  coverage(): Promise<CoverageDoc> {
    return Promise.resolve({
      digest: this.digest,
      clean: true,
      orphan_pis: [],
      unmonitored_requirements: [],
      unobserved_failure_modes: [],
    });
  }
  trace(node: string): Promise<TraceDoc> {
    return Promise.resolve({
      digest: this.digest,
      pi: node,
      perspective: "top_down",
      proposed_by: [],
      paths: [],
    });
  }
  proreq(): Promise<ProreqDoc> {
    return Promise.resolve({ digest: this.digest, entries: [] });
  }
  processState(): Promise<ProcessDoc> {
    return Promise.resolve({
      digest: this.digest,
      phase: "pi_log_draft",
      top_down_done: true,
      bottom_up_done: true,
      harmonization_iteration: 0,
      interface_iteration: 0,
      threshold: 0.6,
      warn_utilization: 0.8,
      suppressions: [],
      decisions: 0,
      open_conflicts: 0,
      interfaces: [],
    });
  }
  icd(): Promise<IcdDoc> {
    return Promise.resolve({ digest: this.digest, icd: null, idl: null });
  }
  decide(_id: string, body: { digest: string }): Promise<ProcessDoc> {
    this.decideCalls += 1;
    this.sentDigests.push(body.digest);
    return new Promise((resolve) => {
      this.releaseDecide = () => {
        void this.processState().then(resolve);
      };
    });
  }
  resolve(): Promise<ProcessDoc> {
    return this.processState();
  }
}

describe("WorkbenchSession mutation gate", () => {
  it("allows at most one in-flight mutation", async () => {
    const stub = new StubApi();
    const session = new WorkbenchSession(stub, COORDINATOR);
    await session.refresh();

    const first = session.decide("MP-1", "merge", "first");
    expect(session.busy).toBe(true);
    const second = await session.decide("MP-1", "merge", "second");
    expect(second).toBe(false); // refused while the first is in flight
    expect(stub.decideCalls).toBe(1);

    stub.releaseDecide!();
    expect(await first).toBe(true);
    expect(session.busy).toBe(false);
    expect(stub.sentDigests).toEqual(["d".repeat(64)]); // last-seen digest rode along
  });
});
