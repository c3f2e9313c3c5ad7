/**
 * Review board: the harmonization proposal queue.
 *
 * One card per proposal, highest score first, with both candidate PIs shown
 * side by side so a reviewer can compare description, unit, range, and
 * provenance before deciding. Merge and keep-separate both demand a written
 * rationale; the buttons stay disabled until one is typed.
 */

import { clear, el, formatRange } from "./dom.js";
import type { SessionView } from "./session.js";
import type { PiDoc, ProposalDoc } from "./types.js";

export class ReviewBoard {
  private readonly session: SessionView;

  constructor(session: SessionView) {
    this.session = session;
  }

  render(root: HTMLElement): void {
    clear(root);
    const proposals = this.session.proposals?.proposals ?? [];
    if (proposals.length === 0) {
      root.append(el("p", "empty-state", "no merge proposals pending"));
      return;
    }
    for (const proposal of proposals) {
      root.append(this.card(proposal));
    }
  }

  private card(proposal: ProposalDoc): HTMLElement {
    const card = el("section", "proposal-card");
    card.dataset.proposal = proposal.id;

    const head = el("header", "proposal-head");
    head.append(el("span", "proposal-id", proposal.id));
    head.append(el("span", "proposal-score", `score ${proposal.score.toFixed(2)}`));
    card.append(head);

    const pair = el("div", "candidate-pair");
    for (const candidateId of proposal.candidates) {
      pair.append(this.candidate(candidateId, candidateId === proposal.suggested_canonical));
    }
    card.append(pair);

    const reasons = el("ul", "proposal-reasons");
    for (const reason of proposal.reasons) {
      reasons.append(el("li", "reason", reason));
    }
    card.append(reasons);

    card.append(this.controls(proposal));
    return card;
  }

  private candidate(id: string, canonical: boolean): HTMLElement {
    const box = el("div", canonical ? "candidate canonical" : "candidate");
    box.dataset.pi = id;
    const pi = this.session.pilog?.pis.find((entry) => entry.id === id);
    box.append(el("h4", "candidate-id", canonical ? `${id} (suggested canonical)` : id));
    if (!pi) {
      box.append(el("p", "candidate-missing", "not in the current log"));
      return box;
    }
    box.append(el("p", "candidate-description", pi.description));
    const facts = el("dl", "candidate-facts");
    this.fact(facts, "unit", pi.unit);
    this.fact(facts, "range", formatRange(pi.range));
    this.fact(facts, "provenance", this.provenance(pi));
    box.append(facts);
    return box;
  }

  private fact(list: HTMLElement, label: string, value: string): void {
    list.append(el("dt", "fact-label", label));
    list.append(el("dd", "fact-value", value));
  }

  private provenance(pi: PiDoc): string {
    const proposers = pi.proposed_by.map((actor) => `${actor.role} ${actor.name}`);
    return `${pi.perspective} by ${proposers.join(", ")}`;
  }

  private controls(proposal: ProposalDoc): HTMLElement {
    const form = el("div", "decision-controls");
    const rationale = el("textarea", "rationale-input");
    rationale.placeholder = "rationale (required)";
    const merge = el("button", "merge-button", "merge");
    const keep = el("button", "keep-button", "keep separate");

    const locked = this.session.readOnly || this.session.busy;
    const sync = () => {
      const empty = rationale.value.trim() === "";
      merge.disabled = locked || empty; // never submit without a rationale
      keep.disabled = locked || empty;
    };
    sync();
    rationale.addEventListener("input", sync);
    rationale.disabled = this.session.readOnly;

    merge.addEventListener("click", () => {
      void this.session.decide(proposal.id, "merge", rationale.value.trim());
    });
    keep.addEventListener("click", () => {
      void this.session.decide(proposal.id, "keep_separate", rationale.value.trim());
    });

    form.append(rationale, merge, keep);
    return form;
  }
}
