"""Duplicate detection and coordinator-decided consolidation of PI proposals.

Candidate pairs come from a token-set similarity over the PI ids plus a
dimensional-compatibility gate.  Nothing merges automatically: every pair
becomes a proposal the coordinator rules on, and every ruling is anchored
to the bundle digest it was made against.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace
from typing import Optional

from .diagnostics import Diagnostic, Severity
from .errors import (
    ConflictingDecisions,
    InvalidThreshold,
    RoleViolation,
    StaleDecision,
    UnknownProposal,
)
from .model import Attribution, PerformanceIndicator, Role, UncertaintyKind, validate_pi
from .pid import Decision, Verdict
from .units import units_compatible

_SEGMENT_RE = re.compile(r"[._]+")

DEFAULT_THRESHOLD = 0.6

Pair = tuple[str, str]


@dataclass(frozen=True)
class MergeProposal:
    """A suspected duplicate pair awaiting a coordinator verdict."""

    id: str
    candidates: Pair  # lexicographically ordered
    suggested_canonical: str
    score: float
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class LogEvent:
    """A harmonization outcome the process log must record."""

    action: str
    subject: str
    detail: str
    actor: Optional[Attribution] = None


@dataclass(frozen=True)
class HarmonizationOutcome:
    consolidated: tuple[PerformanceIndicator, ...]
    events: tuple[LogEvent, ...]
    kept_separate: frozenset[Pair]


def token_set(pi_id: str) -> frozenset[str]:
    return frozenset(t for t in _SEGMENT_RE.split(pi_id.lower()) if t)


def similarity(a: str, b: str) -> float:
    """Jaccard index of the id token sets; 1.0 when both are empty."""
    ta, tb = token_set(a), token_set(b)
    if not ta and not tb:
        return 1.0
    union = ta | tb
    return len(ta & tb) / len(union)


def proposal_id(pair: Pair) -> str:
    digest = hashlib.sha256(f"{pair[0]}|{pair[1]}".encode("utf-8")).hexdigest()
    return f"MP-{digest[:8]}"


def _check_threshold(threshold: float) -> None:
    if not (0.0 < threshold <= 1.0):
        raise InvalidThreshold(f"similarity threshold must be in (0, 1], got {threshold}")


def propose_merges(
    proposals: tuple[PerformanceIndicator, ...],
    threshold: float = DEFAULT_THRESHOLD,
    suppressions: frozenset[Pair] = frozenset(),
) -> list[MergeProposal]:
    """All dimension-compatible pairs at or above the similarity threshold.

    Pairs the coordinator already ruled keep_separate are suppressed.
    Output is ordered by descending score, then candidate pair, so equal
    inputs give byte-equal reports.
    """

    _check_threshold(threshold)
    by_id = {p.id: p for p in proposals}
    ids = sorted(by_id)
    out: list[MergeProposal] = []
    for i, a_id in enumerate(ids):
        for b_id in ids[i + 1 :]:
            pair: Pair = (a_id, b_id)
            if pair in suppressions:
                continue
            a, b = by_id[a_id], by_id[b_id]
            if not units_compatible(a.unit, b.unit):
                continue
            score = similarity(a_id, b_id)
            if score < threshold:
                continue
            reasons = ["same_dimension", "name_similarity"]
            if a.range.overlaps(b.range):
                reasons.append("range_overlap")
            if a.provider == b.provider:
                reasons.append("same_provider")
            out.append(
                MergeProposal(
                    id=proposal_id(pair),
                    candidates=pair,
                    suggested_canonical=a_id,
                    score=score,
                    reasons=tuple(reasons),
                )
            )
    out.sort(key=lambda mp: (-mp.score, mp.candidates))
    return out


def _merge_uncertainty(canonical, absorbed):
    """Returns (spec, defaulted) where defaulted flags a both-undeclared merge."""
    ck, ak = canonical.kind, absorbed.kind
    none = UncertaintyKind.NONE_DECLARED
    if ck is none and ak is none:
        return canonical, True
    if ck is none:
        return absorbed, False
    if ak is none:
        return canonical, False
    if canonical.is_quantitative and absorbed.is_quantitative:
        if (absorbed.magnitude or 0.0) > (canonical.magnitude or 0.0):
            return absorbed, False
        return canonical, False
    if canonical.is_quantitative:
        return canonical, False
    if absorbed.is_quantitative:
        return absorbed, False
    return canonical, False


def _merge_pair(
    canonical: PerformanceIndicator,
    absorbed: PerformanceIndicator,
    decision: Decision,
) -> tuple[PerformanceIndicator | None, list[LogEvent]]:
    events: list[LogEvent] = []
    merged_range = canonical.range.intersect(absorbed.range)
    if merged_range is None:
        events.append(
            LogEvent(
                action="range_conflict",
                subject=canonical.id,
                detail=(
                    f"ranges of {canonical.id} and {absorbed.id} do not intersect; "
                    f"merge under {decision.id} skipped"
                ),
                actor=decision.decided_by,
            )
        )
        return None, events

    uncertainty, defaulted = _merge_uncertainty(canonical.uncertainty, absorbed.uncertainty)
    attributions = tuple(
        sorted(set(canonical.proposed_by) | set(absorbed.proposed_by), key=Attribution.sort_key)
    )
    merged = replace(
        canonical,
        range=merged_range,
        uncertainty=uncertainty,
        proposed_by=attributions,
        traces=canonical.traces | absorbed.traces,
        integral=canonical.integral and absorbed.integral,
        proxy_for=canonical.proxy_for if canonical.proxy_for is not None else absorbed.proxy_for,
        merged_from=canonical.merged_from | absorbed.merged_from | {absorbed.id},
    )
    events.append(
        LogEvent(
            action="merge_pis",
            subject=canonical.id,
            detail=f"absorbed {absorbed.id} under {decision.id}",
            actor=decision.decided_by,
        )
    )
    if defaulted:
        events.append(
            LogEvent(
                action="uncertainty_defaulted",
                subject=canonical.id,
                detail="neither candidate declared uncertainty; still undeclared after merge",
                actor=decision.decided_by,
            )
        )
    return merged, events


def apply_decisions(
    proposals: tuple[PerformanceIndicator, ...],
    decisions: list[Decision],
    current_digest: str,
    threshold: float = DEFAULT_THRESHOLD,
    suppressions: frozenset[Pair] = frozenset(),
) -> HarmonizationOutcome:
    """Consolidate the log by the coordinator's rulings.

    Rejects rulings that are stale (wrong digest), name unknown proposals,
    come from anyone but the coordinator, or involve one PI in two merges
    within one round (chained merges take another round each).
    """

    _check_threshold(threshold)
    open_proposals = {
        mp.id: mp for mp in propose_merges(proposals, threshold, suppressions)
    }

    seen: dict[str, Verdict] = {}
    unique: list[Decision] = []
    for decision in sorted(decisions, key=lambda d: d.id):
        if decision.decided_by.role is not Role.SELF_PERCEPTION_COORDINATOR:
            raise RoleViolation(
                f"decision {decision.id!r}: only the self perception coordinator "
                f"rules on merges, not {decision.decided_by.role.value}"
            )
        if decision.bundle_digest != current_digest:
            raise StaleDecision(
                f"decision {decision.id!r} was made against digest "
                f"{decision.bundle_digest[:12]}..., log is at {current_digest[:12]}..."
            )
        if decision.proposal not in open_proposals:
            raise UnknownProposal(
                f"decision {decision.id!r} names unknown merge proposal {decision.proposal!r}"
            )
        if decision.proposal in seen:
            if seen[decision.proposal] is not decision.verdict:
                raise ConflictingDecisions(
                    f"proposal {decision.proposal!r} decided both ways"
                )
            continue
        seen[decision.proposal] = decision.verdict
        unique.append(decision)

    merging: dict[str, str] = {}
    for decision in unique:
        if decision.verdict is not Verdict.MERGE:
            continue
        for pid in open_proposals[decision.proposal].candidates:
            if pid in merging:
                raise ConflictingDecisions(
                    f"PI {pid!r} appears in merge decisions {merging[pid]!r} "
                    f"and {decision.id!r}; merge one pair per round"
                )
            merging[pid] = decision.id

    by_id = {p.id: p for p in proposals}
    events: list[LogEvent] = []
    kept: set[Pair] = set()
    for decision in unique:
        mp = open_proposals[decision.proposal]
        a_id, b_id = mp.candidates
        if decision.verdict is Verdict.KEEP_SEPARATE:
            kept.add(mp.candidates)
            events.append(
                LogEvent(
                    action="keep_separate",
                    subject=f"{a_id}|{b_id}",
                    detail=f"ruled distinct under {decision.id}: {decision.rationale}",
                    actor=decision.decided_by,
                )
            )
            continue
        canonical_id = mp.suggested_canonical
        absorbed_id = b_id if canonical_id == a_id else a_id
        merged, merge_events = _merge_pair(by_id[canonical_id], by_id[absorbed_id], decision)
        events.extend(merge_events)
        if merged is None:
            continue
        del by_id[absorbed_id]
        by_id[canonical_id] = merged

    consolidated = tuple(sorted(by_id.values(), key=lambda p: p.id))
    return HarmonizationOutcome(
        consolidated=consolidated,
        events=tuple(events),
        kept_separate=frozenset(kept),
    )


def completeness_report(
    consolidated: tuple[PerformanceIndicator, ...],
) -> list[Diagnostic]:
    """What still blocks the consolidated log from interface definition.

    Undeclared uncertainty stays a warning (routed to the function expert);
    a PI tracing to nothing is an error, since an untraceable interface
    could never be justified later.
    """

    out: list[Diagnostic] = []
    for pi in sorted(consolidated, key=lambda p: p.id):
        out.extend(validate_pi(pi))
        if not pi.traces:
            out.append(
                Diagnostic(
                    severity=Severity.ERROR,
                    code="E_NO_TRACES",
                    message=(
                        f"PI {pi.id!r} traces to no requirement or failure mode; "
                        "its interface could not be justified"
                    ),
                    field="traces",
                )
            )
    return out
