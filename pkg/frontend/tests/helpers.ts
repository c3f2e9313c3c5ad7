/**
 * Shared plumbing for the workbench tests: building fixture projects with
 * the piforge CLI, serving them with a frozen clock, raw HTTP access for
 * the replay lane, and byte-level directory comparison.
 */

import { spawn, spawnSync } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { cpSync, readdirSync, readFileSync, statSync } from "node:fs";
import { join } from "node:path";

// vitest runs from the frontend directory, the one holding vitest.config.ts
const TESTS_DIR = join(process.cwd(), "tests");
export const FIXTURES_DIR = join(TESTS_DIR, "fixtures");
export const DIST_DIR = join(TESTS_DIR, "..", "dist");
const SRC_DIR = join(TESTS_DIR, "..", "..", "src");

const CLI_ENV = {
  ...process.env,
  PYTHONPATH: SRC_DIR,
  PIFORGE_NO_COLOR: "1",
};

function cli(args: string[]): void {
  const result = spawnSync("python3", ["-m", "piforge.cli", ...args], {
    env: CLI_ENV,
    encoding: "utf8",
  });
  if (result.status !== 0) {
    throw new Error(`piforge ${args.join(" ")} failed:\n${result.stdout}${result.stderr}`);
  }
}

/** Drive the fixture item to the conflict_resolution phase in `projectDir`. */
export function buildConflictProject(projectDir: string): void {
  cli([
    "init",
    "--project",
    projectDir,
    "--actor",
    "self_perception_coordinator:Alex Chen",
    join(FIXTURES_DIR, "diag_base.pid"),
  ]);
  cli([
    "propose",
    "--project",
    projectDir,
    "--branch",
    "top_down",
    "--actor",
    "safety_engineer:Mara Ellis",
    join(FIXTURES_DIR, "diag_topdown.pid"),
  ]);
  cli([
    "propose",
    "--project",
    projectDir,
    "--branch",
    "bottom_up",
    "--actor",
    "function_expert:Jonas Weber",
    join(FIXTURES_DIR, "diag_bottomup.pid"),
  ]);
}

export interface RunningServer {
  port: number;
  base: string;
  child: ChildProcess;
}

/** Spawn the fixed-clock server; resolves once it prints READY. */
export function serveProject(
  projectDir: string,
  options: { readOnly?: boolean; ui?: string } = {},
): Promise<RunningServer> {
  const args = [join(TESTS_DIR, "serve_fixture.py"), projectDir];
  if (options.readOnly) {
    args.push("--read-only");
  }
  if (options.ui) {
    args.push(`--ui=${options.ui}`);
  }
  const child = spawn("python3", args, { env: CLI_ENV });
  return new Promise((resolve, reject) => {
    let buffer = "";
    const fail = (err: unknown) => reject(new Error(`server failed to start: ${String(err)}`));
    child.once("error", fail);
    child.stderr?.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    child.once("exit", () => fail(buffer));
    child.stdout?.on("data", (chunk: Buffer) => {
      const match = /READY (\d+)/.exec(chunk.toString());
      if (match) {
        child.removeAllListeners("exit");
        const port = Number(match[1]);
        resolve({ port, base: `http://127.0.0.1:${port}`, child });
      }
    });
  });
}

export function stopServer(server: RunningServer): Promise<void> {
  return new Promise((resolve) => {
    server.child.once("exit", () => resolve());
    server.child.kill("SIGTERM");
  });
}

export function copyTree(from: string, to: string): void {
  cpSync(from, to, { recursive: true });
}

export async function rawGet(base: string, path: string): Promise<unknown> {
  const response = await fetch(base + path);
  return response.json();
}

export async function rawPost(
  base: string,
  path: string,
  body: unknown,
): Promise<{ status: number; doc: unknown }> {
  const response = await fetch(base + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return { status: response.status, doc: await response.json() };
}

/** Map of relative path to file bytes, for whole-tree comparison. */
export function readTree(root: string): Map<string, Buffer> {
  const files = new Map<string, Buffer>();
  const walk = (dir: string, prefix: string) => {
    for (const entry of readdirSync(dir).sort()) {
      const full = join(dir, entry);
      const rel = prefix === "" ? entry : `${prefix}/${entry}`;
      if (statSync(full).isDirectory()) {
        walk(full, rel);
      } else {
        files.set(rel, readFileSync(full));
      }
    }
  };
  walk(root, "");
  return files;
}

export function expectTreesEqual(a: string, b: string): void {
  const treeA = readTree(a);
  const treeB = readTree(b);
  const namesA = [...treeA.keys()];
  const namesB = [...treeB.keys()];
  if (namesA.join("\n") !== namesB.join("\n")) {
    throw new Error(`tree file lists differ:\n${namesA.join(", ")}\nvs\n${namesB.join(", ")}`);
  }
  for (const [name, bytes] of treeA) {
    if (!bytes.equals(treeB.get(name)!)) {
      throw new Error(`file ${name} differs between the two trees`);
    }
  }
}

/** Poll until `check` stops throwing; rethrows the last failure on timeout. */
export async function until(check: () => void | Promise<void>, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await check();
      return;
    } catch (err) {
      if (Date.now() > deadline) {
        throw err;
      }
      await new Promise((resolve) => setTimeout(resolve, 50));
    }
  }
}
