/**
 * Conflict console: open transport conflicts and their resolution forms.
 *
 * Each conflict shows the affected requirements and failure modes as an
 * information-loss preview: what goes unobserved if the PI is dropped. A
 * resolution picks one of three kinds, names both co-signing actors, and
 * carries a rationale. Companion tabs show the PRO-REQ checklist and the
 * ICD preview. Against a read-only server every control is disabled.
 */

import { clear, el } from "./dom.js";
import type { SessionView } from "./session.js";
import type { ConflictDoc, ResolutionBody, ResolutionKind } from "./types.js";

const KINDS: ResolutionKind[] = ["adjust_pi", "reallocate_bus", "drop_pi"];

type ConsoleTab = "queue" | "proreq" | "icd";

export class ConflictConsole {
  private readonly session: SessionView;
  private root: HTMLElement | null = null;
  private tab: ConsoleTab = "queue";

  constructor(session: SessionView) {
    this.session = session;
  }

  render(root: HTMLElement): void {
    this.root = root;
    clear(root);
    if (this.session.readOnly) {
      root.append(el("p", "read-only-notice", "server is read-only, controls disabled"));
    }
    root.append(this.tabBar());
    const body = el("div", "console-body");
    if (this.tab === "queue") {
      this.renderQueue(body);
    } else if (this.tab === "proreq") {
      this.renderProreq(body);
    } else {
      this.renderIcd(body);
    }
    root.append(body);
  }

  private tabBar(): HTMLElement {
    const bar = el("nav", "console-tabs");
    const labels: [ConsoleTab, string][] = [
      ["queue", "conflicts"],
      ["proreq", "PRO-REQ checklist"],
      ["icd", "ICD preview"],
    ];
    for (const [tab, label] of labels) {
      const button = el("button", this.tab === tab ? "console-tab active" : "console-tab", label);
      button.dataset.tab = tab;
      button.addEventListener("click", () => {
        this.tab = tab;
        if (this.root) {
          this.render(this.root);
        }
      });
      bar.append(button);
    }
    return bar;
  }

  private renderQueue(body: HTMLElement): void {
    const conflicts = this.session.conflicts?.conflicts ?? [];
    if (conflicts.length === 0) {
      body.append(el("p", "empty-state", "no open conflicts"));
      return;
    }
    for (const conflict of conflicts) {
      body.append(this.conflictCard(conflict));
    }
  }

  private conflictCard(conflict: ConflictDoc): HTMLElement {
    const card = el("section", "conflict-card");
    card.dataset.conflict = conflict.id;
    const head = el("header", "conflict-head");
    head.append(el("span", "conflict-id", conflict.id));
    head.append(el("span", "conflict-pi", conflict.pi));
    card.append(head);
    card.append(el("p", "conflict-reason", conflict.reason));

    const loss = el("div", "info-loss");
    loss.append(el("h4", "info-loss-label", "information loss if dropped"));
    if (conflict.affected.length === 0) {
      loss.append(el("p", "info-loss-none", "nothing traces to this PI"));
    } else {
      const list = el("ul", "info-loss-list");
      for (const id of conflict.affected) {
        list.append(el("li", "info-loss-item", `${id} goes unobserved`));
      }
      loss.append(list);
    }
    card.append(loss);

    card.append(this.resolutionForm(conflict));
    return card;
  }

  private resolutionForm(conflict: ConflictDoc): HTMLElement {
    const form = el("div", "resolution-form");
    const locked = this.session.readOnly || this.session.busy;

    const kindSelect = el("select", "kind-select");
    for (const kind of KINDS) {
      const option = el("option", undefined, kind);
      option.value = kind;
      kindSelect.append(option);
    }

    const fields = el("div", "kind-fields");
    const rate = this.numberInput("new rate hz", "rate-input");
    const payload = this.numberInput("new payload bits", "payload-input");
    const freshness = this.numberInput("new freshness s", "freshness-input");
    const bus = el("input", "bus-input");
    bus.placeholder = "target bus";

    const syncFields = () => {
      clear(fields);
      if (kindSelect.value === "adjust_pi") {
        fields.append(rate, payload, freshness);
      } else if (kindSelect.value === "reallocate_bus") {
        fields.append(bus);
      } // drop_pi takes no extra fields
    };
    syncFields();
    kindSelect.addEventListener("change", syncFields);

    const coordinator = el("input", "coordinator-input");
    coordinator.placeholder = "self perception coordinator (co-sign)";
    const architect = el("input", "architect-input");
    architect.placeholder = "architectural system engineer (co-sign)";
    const rationale = el("textarea", "rationale-input");
    rationale.placeholder = "rationale (required)";
    const apply = el("button", "apply-button", "apply resolution");

    const sync = () => {
      const incomplete =
        rationale.value.trim() === "" ||
        coordinator.value.trim() === "" ||
        architect.value.trim() === "";
      apply.disabled = locked || incomplete; // both signers and a rationale
    };
    sync();
    for (const input of [rationale, coordinator, architect]) {
      input.addEventListener("input", sync);
    }
    for (const control of [kindSelect, rate, payload, freshness, bus, coordinator, architect, rationale]) {
      control.disabled = this.session.readOnly;
    }

    apply.addEventListener("click", () => {
      const body: Omit<ResolutionBody, "digest"> = {
        kind: kindSelect.value as ResolutionKind,
        rationale: rationale.value.trim(),
        actors: [
          { role: "self_perception_coordinator", name: coordinator.value.trim() },
          { role: "architectural_system_engineer", name: architect.value.trim() },
        ],
      };
      if (kindSelect.value === "adjust_pi") {
        if (rate.value.trim() !== "") {
          body.new_rate_hz = Number(rate.value);
        }
        if (payload.value.trim() !== "") {
          body.new_payload_bits = Number(payload.value);
        }
        if (freshness.value.trim() !== "") {
          body.new_freshness_s = Number(freshness.value);
        }
      } else if (kindSelect.value === "reallocate_bus") {
        body.target_bus = bus.value.trim();
      }
      void this.session.resolve(conflict.id, body);
    });

    form.append(kindSelect, fields, coordinator, architect, rationale, apply);
    return form;
  }

  private numberInput(placeholder: string, className: string): HTMLInputElement {
    const input = el("input", className);
    input.type = "number";
    input.placeholder = placeholder;
    return input;
  }

  private renderProreq(body: HTMLElement): void {
    const entries = this.session.proreq?.entries ?? [];
    if (entries.length === 0) {
      body.append(el("p", "empty-state", "checklist not available"));
      return;
    }
    const list = el("ul", "proreq-list");
    for (const entry of entries) {
      const item = el("li", entry.satisfied ? "proreq-entry satisfied" : "proreq-entry open");
      item.append(el("span", "proreq-mark", entry.satisfied ? "[x]" : "[ ]"));
      item.append(el("span", "proreq-id", `PRO-REQ ${entry.id}`));
      item.append(el("span", "proreq-evidence", entry.evidence));
      list.append(item);
    }
    body.append(list);
  }

  private renderIcd(body: HTMLElement): void {
    const icd = this.session.icd;
    if (!icd || icd.icd === null) {
      body.append(el("p", "empty-state", "no ICD synthesized yet"));
      return;
    }
    body.append(el("h4", "icd-label", "interface control document"));
    body.append(el("pre", "icd-text", icd.icd));
    if (icd.idl !== null) {
      body.append(el("h4", "icd-label", "message IDL"));
      body.append(el("pre", "idl-text", icd.idl));
    }
  }
}
