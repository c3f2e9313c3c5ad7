"""Structured documents shared by the CLI report command and the HTTP API.

One builder per payload; every document is a plain dict of primitives so
identical state always serializes to identical bytes.
"""

from __future__ import annotations

from typing import Optional

from .engine import ProcessState, proreq_checklist
from .graph import (
    TraceGraph,
    build_graph,
    coverage_report,
    graph_document,
    trace_origin,
)
from .harmonize import MergeProposal, propose_merges
from .model import PerformanceIndicator, UncertaintyKind
from .units import canonical_unit, render_unit

SCHEMA_VERSION = 1


def pi_document(pi: PerformanceIndicator) -> dict:
    unit = canonical_unit(pi.unit)
    rng = pi.range.converted(unit)
    unc: dict = {"kind": pi.uncertainty.kind.value}
    if pi.uncertainty.magnitude is not None:
        unc["magnitude"] = pi.uncertainty.magnitude
    if pi.uncertainty.note is not None:
        unc["note"] = pi.uncertainty.note
    return {
        "id": pi.id,
        "description": pi.description,
        "unit": render_unit(unit),
        "range": [rng.lo.value, rng.hi.value],
        "perspective": pi.perspective.value,
        "proposed_by": [
            {"role": a.role.value, "name": a.name} for a in pi.proposed_by
        ],
        "provider": pi.provider,
        "rate_hz": pi.rate.value,
        "payload_bits_declared": pi.payload.value,
        "freshness_s": pi.freshness.value,
        "uncertainty": unc,
        "traces": sorted(pi.traces),
        "proxy_for": pi.proxy_for,
        "integral": pi.integral,
        "merged_from": sorted(pi.merged_from),
    }


def pilog_document(state: ProcessState) -> dict:
    return {
        "digest": state.current_digest,
        "pis": [pi_document(p) for p in state.consolidated],
    }


def proposal_document(proposal: MergeProposal) -> dict:
    return {
        "id": proposal.id,
        "candidates": list(proposal.candidates),
        "suggested_canonical": proposal.suggested_canonical,
        "score": proposal.score,
        "reasons": list(proposal.reasons),
    }


def proposals_document(state: ProcessState) -> dict:
    queue = propose_merges(
        state.bundle.proposals, state.threshold, state.suppressions
    )
    return {
        "digest": state.current_digest,
        "proposals": [proposal_document(p) for p in queue],
    }


def conflicts_document(state: ProcessState) -> dict:
    return {
        "digest": state.current_digest,
        "conflicts": [
            {
                "id": c.id,
                "pi": c.pi,
                "reason": c.reason,
                "affected": list(c.affected),
            }
            for c in state.conflicts
        ],
    }


def state_graph(state: ProcessState) -> TraceGraph:
    return build_graph(state.bundle, state.bundle.proposals, state.interfaces)


def graph_payload(state: ProcessState) -> dict:
    doc = graph_document(state_graph(state))
    doc["digest"] = state.current_digest
    return doc


def coverage_document(state: ProcessState) -> dict:
    cov = coverage_report(state_graph(state))
    return {
        "digest": state.current_digest,
        "clean": cov.clean,
        "orphan_pis": list(cov.orphan_pis),
        "unmonitored_requirements": list(cov.unmonitored_requirements),
        "unobserved_failure_modes": list(cov.unobserved_failure_modes),
    }


def trace_document(state: ProcessState, node_id: str) -> dict:
    origin = trace_origin(state_graph(state), node_id)
    return {
        "digest": state.current_digest,
        "pi": origin.pi,
        "perspective": origin.perspective.value,
        "proposed_by": [
            {"role": a.role.value, "name": a.name} for a in origin.proposed_by
        ],
        "paths": [list(p) for p in origin.paths],
    }


def proreq_document(state: ProcessState) -> dict:
    return {
        "digest": state.current_digest,
        "entries": [
            {"id": e.id, "satisfied": e.satisfied, "evidence": e.evidence}
            for e in proreq_checklist(state)
        ],
    }


def interface_document(state: ProcessState) -> list[dict]:
    return [
        {
            "id": i.id,
            "pi": i.pi,
            "provider_service": i.provider_service,
            "bus": i.bus,
            "encoding": i.encoding.value,
            "rate_hz": i.rate.value,
            "payload_bits": i.payload_bits,
            "freshness_s": i.freshness.value,
            "status": i.status.value,
        }
        for i in state.interfaces
    ]


def process_document(state: ProcessState) -> dict:
    return {
        "digest": state.current_digest,
        "phase": state.phase.value,
        "top_down_done": state.top_down_done,
        "bottom_up_done": state.bottom_up_done,
        "harmonization_iteration": state.harmonization_iteration,
        "interface_iteration": state.interface_iteration,
        "threshold": state.threshold,
        "warn_utilization": state.warn_utilization,
        "suppressions": [list(p) for p in sorted(state.suppressions)],
        "decisions": len(state.decisions),
        "open_conflicts": len(state.conflicts),
        "interfaces": interface_document(state),
    }


def icd_document(state: ProcessState) -> dict:
    return {
        "digest": state.current_digest,
        "icd": state.icd_text,
        "idl": state.idl_text,
    }


def version_document(state: Optional[ProcessState] = None) -> dict:
    doc: dict = {"name": "piforge", "schema": SCHEMA_VERSION}
    if state is not None:
        doc["digest"] = state.current_digest
    return doc


def full_report(state: ProcessState) -> dict:
    """Everything the workbench shows, in one document."""

    return {
        "digest": state.current_digest,
        "process": process_document(state),
        "pilog": pilog_document(state)["pis"],
        "proposals": proposals_document(state)["proposals"],
        "conflicts": conflicts_document(state)["conflicts"],
        "coverage": {
            k: v for k, v in coverage_document(state).items() if k != "digest"
        },
        "proreq": proreq_document(state)["entries"],
        "icd_present": state.icd_text is not None,
    }
