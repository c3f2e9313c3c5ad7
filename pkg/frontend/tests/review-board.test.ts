/** Review board rendering and the rationale gate, against a fake session. */

import { beforeEach, describe, expect, it } from "vitest";

import { ReviewBoard } from "../src/review-board.js";
import { draftPilog, fakeSession, mergeProposals } from "./fake-session.js";

function type(input: HTMLTextAreaElement, text: string): void {
  input.value = text;
  input.dispatchEvent(new Event("input"));
}

describe("ReviewBoard", () => {
  let root: HTMLElement;

  beforeEach(() => {
    root = document.createElement("div");
  });

  it("shows an empty state without proposals", () => {
    const session = fakeSession({ proposals: { digest: "x", proposals: [] } });
    new ReviewBoard(session).render(root);
    expect(root.querySelector(".empty-state")?.textContent).toContain("no merge proposals");
  });

  it("renders both candidates side by side with their facts", () => {
    const session = fakeSession({ proposals: mergeProposals(), pilog: draftPilog() });
    new ReviewBoard(session).render(root);

    const card = root.querySelector<HTMLElement>(".proposal-card")!;
    expect(card.dataset.proposal).toBe("MP-97697f75");
    expect(card.querySelector(".proposal-score")?.textContent).toBe("score 0.67");

    const candidates = card.querySelectorAll<HTMLElement>(".candidate");
    expect(candidates).toHaveLength(2);
    expect(candidates[0]!.dataset.pi).toBe("diag.cpu_load");
    expect(candidates[0]!.classList.contains("canonical")).toBe(true);
    expect(candidates[0]!.textContent).toContain("fraction of compute budget in use");
    expect(candidates[1]!.dataset.pi).toBe("diag.load");
    expect(candidates[1]!.textContent).toContain("[0, 1.5]");
    expect(candidates[1]!.textContent).toContain("bottom_up by function_expert Priya Nair");

    const reasons = [...card.querySelectorAll(".reason")].map((li) => li.textContent);
    expect(reasons).toEqual(["same_dimension", "name_similarity", "range_overlap", "same_provider"]);
  });

  it("blocks both verdicts until a rationale is typed", () => {
    const session = fakeSession({ proposals: mergeProposals(), pilog: draftPilog() });
    new ReviewBoard(session).render(root);

    const merge = root.querySelector<HTMLButtonElement>(".merge-button")!;
    const keep = root.querySelector<HTMLButtonElement>(".keep-button")!;
    const rationale = root.querySelector<HTMLTextAreaElement>(".rationale-input")!;

    expect(merge.disabled).toBe(true);
    expect(keep.disabled).toBe(true);

    type(rationale, "   "); // whitespace is not a rationale
    expect(merge.disabled).toBe(true);

    type(rationale, "same saturation effect");
    expect(merge.disabled).toBe(false);
    expect(keep.disabled).toBe(false);

    merge.click();
    expect(session.decisions).toEqual([
      { proposalId: "MP-97697f75", verdict: "merge", rationale: "same saturation effect" },
    ]);
  });

  it("keep separate sends the other verdict", () => {
    const session = fakeSession({ proposals: mergeProposals(), pilog: draftPilog() });
    new ReviewBoard(session).render(root);
    const rationale = root.querySelector<HTMLTextAreaElement>(".rationale-input")!;
    type(rationale, "independent quantities");
    root.querySelector<HTMLButtonElement>(".keep-button")!.click();
    expect(session.decisions[0]?.verdict).toBe("keep_separate");
  });

  it("stays locked on a read-only session", () => {
    const session = fakeSession({
      proposals: mergeProposals(),
      pilog: draftPilog(),
      readOnly: true,
    });
    new ReviewBoard(session).render(root);
    const rationale = root.querySelector<HTMLTextAreaElement>(".rationale-input")!;
    expect(rationale.disabled).toBe(true);
    type(rationale, "attempt");
    expect(root.querySelector<HTMLButtonElement>(".merge-button")!.disabled).toBe(true);
  });

  it("stays locked while a mutation is in flight", () => {
    const session = fakeSession({ proposals: mergeProposals(), pilog: draftPilog(), busy: true });
    new ReviewBoard(session).render(root);
    const rationale = root.querySelector<HTMLTextAreaElement>(".rationale-input")!;
    type(rationale, "second click");
    expect(root.querySelector<HTMLButtonElement>(".merge-button")!.disabled).toBe(true);
  });
});
