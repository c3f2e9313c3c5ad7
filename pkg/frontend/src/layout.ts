/**
 * Deterministic node placement for the trace browser.
 *
 * Nodes are grouped into columns by kind and spread vertically in document
 * order; a seeded generator adds a small jitter so parallel edges stay
 * readable. The same graph, canvas, and seed always produce the same
 * coordinates.
 */

import type { GraphDoc } from "./types.js";

export const KIND_ORDER = [
  "scenario",
  "hazard",
  "requirement",
  "failure_mode",
  "function",
  "service",
  "bus",
  "pi",
  "interface",
] as const;

export interface PlacedNode {
  id: string;
  kind: string;
  x: number;
  y: number;
}

const MARGIN = 60;
const JITTER = 8;

/** Small deterministic PRNG; good enough for layout jitter. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function kindRank(kind: string): number {
  const index = KIND_ORDER.indexOf(kind as (typeof KIND_ORDER)[number]);
  return index === -1 ? KIND_ORDER.length : index;
}

export function layoutGraph(
  doc: GraphDoc,
  width: number,
  height: number,
  seed = 42,
): PlacedNode[] {
  const random = mulberry32(seed);
  const kinds: string[] = [];
  for (const node of doc.nodes) {
    if (!kinds.includes(node.kind)) {
      kinds.push(node.kind);
    }
  }
  kinds.sort((a, b) => kindRank(a) - kindRank(b) || a.localeCompare(b));

  const columnGap = kinds.length > 1 ? (width - 2 * MARGIN) / (kinds.length - 1) : 0;
  const placed: PlacedNode[] = [];
  for (const [column, kind] of kinds.entries()) {
    const members = doc.nodes.filter((node) => node.kind === kind);
    const rowGap = members.length > 1 ? (height - 2 * MARGIN) / (members.length - 1) : 0;
    for (const [row, node] of members.entries()) {
      const x = kinds.length > 1 ? MARGIN + column * columnGap : width / 2;
      const y = members.length > 1 ? MARGIN + row * rowGap : height / 2;
      placed.push({
        id: node.id,
        kind: node.kind,
        x: Math.round((x + (random() * 2 - 1) * JITTER) * 100) / 100,
        y: Math.round((y + (random() * 2 - 1) * JITTER) * 100) / 100,
      });
    }
  }
  return placed;
}
