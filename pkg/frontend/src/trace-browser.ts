/**
 * Trace browser: node-link view of the traceability graph.
 *
 * Nodes are styled by kind and placed by the deterministic layout. Clicking
 * a PI opens its origin traces; clicking a requirement highlights its impact
 * set (everything that reaches it); clicking a bus highlights the interfaces
 * riding on it. A side panel summarizes coverage.
 */

import { clear, el } from "./dom.js";
import { layoutGraph } from "./layout.js";
import type { PlacedNode } from "./layout.js";
import type { SessionView } from "./session.js";
import type { GraphDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 900;
const HEIGHT = 520;

/** Every node with an edge path into `target`. */
export function impactSet(graph: GraphDoc, target: string): Set<string> {
  const reached = new Set<string>();
  const queue = [target];
  while (queue.length > 0) {
    const current = queue.shift()!;
    for (const edge of graph.edges) {
      if (edge.to === current && !reached.has(edge.from)) {
        reached.add(edge.from);
        queue.push(edge.from);
      }
    }
  }
  return reached;
}

/** Interfaces attached to a bus; services ride the same edge kind, skip them. */
export function attachedInterfaces(graph: GraphDoc, bus: string): Set<string> {
  const interfaces = new Set(
    graph.nodes.filter((node) => node.kind === "interface").map((node) => node.id),
  );
  const attached = new Set<string>();
  for (const edge of graph.edges) {
    if (edge.kind === "transported_on" && edge.to === bus && interfaces.has(edge.from)) {
      attached.add(edge.from);
    }
  }
  return attached;
}

export class TraceBrowser {
  private readonly session: SessionView;
  private root: HTMLElement | null = null;
  private selected: string | null = null;
  private highlighted = new Set<string>();

  constructor(session: SessionView) {
    this.session = session;
  }

  render(root: HTMLElement): void {
    this.root = root;
    clear(root);
    const graph = this.session.graph;
    if (!graph || graph.nodes.length === 0) {
      root.append(el("p", "empty-state", "the graph is empty, nothing to trace yet"));
      return;
    }
    const placed = layoutGraph(graph, WIDTH, HEIGHT);
    root.append(this.canvas(graph, placed));
    const side = el("aside", "trace-side");
    side.append(this.tracePanel());
    side.append(this.coveragePanel());
    root.append(side);
  }

  private canvas(graph: GraphDoc, placed: PlacedNode[]): SVGSVGElement {
    const byId = new Map(placed.map((node) => [node.id, node]));
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "trace-canvas");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);

    for (const edge of graph.edges) {
      const from = byId.get(edge.from);
      const to = byId.get(edge.to);
      if (!from || !to) {
        continue;
      }
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("class", `edge edge-${edge.kind}`);
      line.setAttribute("x1", String(from.x));
      line.setAttribute("y1", String(from.y));
      line.setAttribute("x2", String(to.x));
      line.setAttribute("y2", String(to.y));
      svg.append(line);
    }

    for (const node of placed) {
      const group = document.createElementNS(SVG_NS, "g");
      const classes = ["node", `kind-${node.kind}`];
      if (node.id === this.selected) {
        classes.push("selected");
      }
      if (this.highlighted.has(node.id)) {
        classes.push("highlighted");
      }
      group.setAttribute("class", classes.join(" "));
      group.setAttribute("data-node", node.id);

      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(node.x));
      dot.setAttribute("cy", String(node.y));
      dot.setAttribute("r", "9");
      group.append(dot);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(node.x + 12));
      label.setAttribute("y", String(node.y + 4));
      label.textContent = node.id;
      group.append(label);

      group.addEventListener("click", () => this.select(node));
      svg.append(group);
    }
    return svg;
  }

  private select(node: PlacedNode): void {
    const graph = this.session.graph;
    this.selected = node.id;
    this.highlighted = new Set();
    if (graph && node.kind === "requirement") {
      this.highlighted = impactSet(graph, node.id);
    } else if (graph && node.kind === "bus") {
      this.highlighted = attachedInterfaces(graph, node.id);
    } else if (node.kind === "pi") {
      void this.session.loadTrace(node.id); // panel fills in when the trace lands
    }
    if (this.root) {
      this.render(this.root);
    }
  }

  private tracePanel(): HTMLElement {
    const panel = el("section", "trace-panel");
    panel.append(el("h3", "panel-title", "origin trace"));
    const trace = this.session.trace;
    if (!trace || trace.pi !== this.selected) {
      panel.append(el("p", "panel-hint", "click a PI node to trace its origin"));
      return panel;
    }
    panel.append(el("p", "trace-pi", trace.pi));
    panel.append(el("p", "trace-perspective", `perspective: ${trace.perspective}`));
    const stakeholders = trace.proposed_by
      .map((actor) => `${actor.role} ${actor.name}`)
      .join(", ");
    panel.append(el("p", "trace-stakeholders", `proposed by: ${stakeholders}`));
    const list = el("ol", "trace-paths");
    for (const path of trace.paths) {
      list.append(el("li", "trace-path", path.join(" -> ")));
    }
    panel.append(list);
    return panel;
  }

  private coveragePanel(): HTMLElement {
    const panel = el("section", "coverage-panel");
    panel.append(el("h3", "panel-title", "coverage"));
    const coverage = this.session.coverage;
    if (!coverage) {
      panel.append(el("p", "panel-hint", "coverage not loaded"));
      return panel;
    }
    if (coverage.clean) {
      panel.append(el("p", "coverage-clean", "clean: every PI traces and every target is observed"));
      return panel;
    }
    this.gapList(panel, "orphan PIs", coverage.orphan_pis);
    this.gapList(panel, "unmonitored requirements", coverage.unmonitored_requirements);
    this.gapList(panel, "unobserved failure modes", coverage.unobserved_failure_modes);
    return panel;
  }

  private gapList(panel: HTMLElement, label: string, ids: string[]): void {
    if (ids.length === 0) {
      return;
    }
    panel.append(el("h4", "gap-label", label));
    const list = el("ul", "gap-list");
    for (const id of ids) {
      list.append(el("li", "gap-item", id));
    }
    panel.append(list);
  }
}
