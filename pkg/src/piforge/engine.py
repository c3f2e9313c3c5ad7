"""Role-gated workflow engine over the PI lifecycle.

States are immutable snapshots; every operation returns a new one and
appends audit events whose digest chain replays the whole history from
the initial bundle.  Timestamps come from an injected clock so runs are
reproducible.  One writer at a time; readers share snapshots freely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Optional, Sequence

from .canonical import canonicalize_bundle, sha256_hex, snapshot_hash
from .diagnostics import Severity
from .errors import (
    IncompleteItemDefinition,
    InvalidProposal,
    InvalidResolution,
    RoleViolation,
    UnknownConflict,
    UnresolvedReference,
    WrongPhase,
)
from .graph import build_graph, coverage_report
from .harmonize import (
    DEFAULT_THRESHOLD,
    Pair,
    apply_decisions,
    completeness_report,
    propose_merges,
)
from .model import (
    Attribution,
    ItemBundle,
    PerformanceIndicator,
    Perspective,
    Role,
    resolve_bundle,
    validate_pi,
)
from .pid import Decision
from .synth import (
    WARN_UTILIZATION,
    PiInterface,
    allocate,
    assemble_quality_vectors,
    check_feasibility,
    emit_icd,
    emit_idl,
    nonviable_report,
)
from .units import HERTZ, SECOND, BIT, Quantity, convert

Clock = Callable[[], str]


def system_clock() -> str:
    return datetime.now(timezone.utc).isoformat()

# Stable clock for callers that prize reproducibility over wall time.
EPOCH = "1970-01-01T00:00:00+00:00"


def fixed_clock(timestamp: str = EPOCH) -> Clock:
    return lambda: timestamp


class Phase(str, Enum):
    ITEM_DEFINED = "item_defined"
    ANALYSIS = "analysis"
    PI_LOG_DRAFT = "pi_log_draft"
    HARMONIZATION = "harmonization"
    INTERFACE_DEFINITION = "interface_definition"
    CONFLICT_RESOLUTION = "conflict_resolution"
    INTERFACES_DEFINED = "interfaces_defined"


class ResolutionKind(str, Enum):
    ADJUST_PI = "adjust_pi"
    REALLOCATE_BUS = "reallocate_bus"
    DROP_PI = "drop_pi"


# Which roles may appear on which audit actions.  Checked at append time
# and re-checkable over any persisted log.
LEGAL_ACTIONS: frozenset[tuple[Role, str]] = frozenset(
    {
        (Role.SELF_PERCEPTION_COORDINATOR, "init_process"),
        (Role.SAFETY_ENGINEER, "submit_top_down"),
        (Role.FUNCTION_EXPERT, "submit_bottom_up"),
        (Role.SELF_PERCEPTION_COORDINATOR, "merge_pis"),
        (Role.SELF_PERCEPTION_COORDINATOR, "keep_separate"),
        (Role.SELF_PERCEPTION_COORDINATOR, "uncertainty_defaulted"),
        (Role.SELF_PERCEPTION_COORDINATOR, "range_conflict"),
        (Role.SELF_PERCEPTION_COORDINATOR, "harmonization_review"),
        (Role.ARCHITECTURAL_SYSTEM_ENGINEER, "interface_check"),
        (Role.ARCHITECTURAL_SYSTEM_ENGINEER, "emit_icd"),
        (Role.ARCHITECTURAL_SYSTEM_ENGINEER, "emit_idl"),
        (Role.SELF_PERCEPTION_COORDINATOR, "resolve_conflict"),
        (Role.ARCHITECTURAL_SYSTEM_ENGINEER, "resolve_conflict"),
        (Role.SELF_PERCEPTION_COORDINATOR, "information_loss"),
    }
)

SYSTEM_COORDINATOR = Attribution(Role.SELF_PERCEPTION_COORDINATOR, "system")
SYSTEM_ARCHITECT = Attribution(Role.ARCHITECTURAL_SYSTEM_ENGINEER, "system")


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    actor: Attribution
    action: str
    subject: str
    digest_before: str
    digest_after: str
    timestamp: str


@dataclass(frozen=True)
class Conflict:
    id: str
    pi: str
    reason: str
    affected: tuple[str, ...]


@dataclass(frozen=True)
class Resolution:
    kind: ResolutionKind
    rationale: str
    new_rate: Optional[Quantity] = None
    new_payload: Optional[Quantity] = None
    new_freshness: Optional[Quantity] = None
    target_bus: Optional[str] = None


@dataclass(frozen=True)
class ProcessState:
    bundle: ItemBundle
    phase: Phase
    current_digest: str
    top_down_done: bool = False
    bottom_up_done: bool = False
    harmonization_iteration: int = 0
    interface_iteration: int = 0
    threshold: float = DEFAULT_THRESHOLD
    warn_utilization: float = WARN_UTILIZATION
    suppressions: frozenset[Pair] = frozenset()
    decisions: tuple[Decision, ...] = ()
    conflicts: tuple[Conflict, ...] = ()
    allocation_overrides: tuple[tuple[str, str], ...] = ()
    interfaces: tuple[PiInterface, ...] = ()
    icd_text: Optional[str] = None
    idl_text: Optional[str] = None
    audit: tuple[AuditEvent, ...] = ()

    @property
    def consolidated(self) -> tuple[PerformanceIndicator, ...]:
        return self.bundle.proposals

    def conflict(self, conflict_id: str) -> Optional[Conflict]:
        for c in self.conflicts:
            if c.id == conflict_id:
                return c
        return None

    def open_proposals(self):
        return propose_merges(
            self.bundle.proposals, self.threshold, self.suppressions
        )


def _append(
    state_audit: tuple[AuditEvent, ...],
    actor: Attribution,
    action: str,
    subject: str,
    digest_before: str,
    digest_after: str,
    clock: Clock,
) -> tuple[AuditEvent, ...]:
    if (actor.role, action) not in LEGAL_ACTIONS:
        raise RoleViolation(
            f"role {actor.role.value} may not record action {action!r}"
        )
    seq = state_audit[-1].seq + 1 if state_audit else 0
    event = AuditEvent(
        seq=seq,
        actor=actor,
        action=action,
        subject=subject,
        digest_before=digest_before,
        digest_after=digest_after,
        timestamp=clock(),
    )
    return state_audit + (event,)


def init_process(
    bundle: ItemBundle,
    actor: Attribution = SYSTEM_COORDINATOR,
    clock: Clock = system_clock,
    threshold: float = DEFAULT_THRESHOLD,
    warn_utilization: float = WARN_UTILIZATION,
) -> ProcessState:
    """Start from the item definition; nothing earlier counts as a start."""

    if actor.role is not Role.SELF_PERCEPTION_COORDINATOR:
        raise RoleViolation(
            f"process start is the coordinator's act, not {actor.role.value}"
        )
    if not bundle.item.scenarios:
        raise IncompleteItemDefinition("item definition has no scenarios")
    if bundle.architecture.is_empty:
        raise IncompleteItemDefinition("item definition has no architecture")
    errors = [d for d in resolve_bundle(bundle) if d.severity is Severity.ERROR]
    if errors:
        raise IncompleteItemDefinition(
            "bundle does not resolve: " + "; ".join(d.message for d in errors)
        )
    canonical = canonicalize_bundle(bundle)
    digest = snapshot_hash(canonical)
    audit = _append((), actor, "init_process", "bundle", digest, digest, clock)
    return ProcessState(
        bundle=canonical,
        phase=Phase.ITEM_DEFINED,
        current_digest=digest,
        threshold=threshold,
        warn_utilization=warn_utilization,
        audit=audit,
    )


_BRANCH_GATE = {
    Perspective.TOP_DOWN: Role.SAFETY_ENGINEER,
    Perspective.BOTTOM_UP: Role.FUNCTION_EXPERT,
}


def submit_perspective(
    state: ProcessState,
    branch: Perspective,
    proposals: Sequence[PerformanceIndicator],
    actor: Attribution,
    clock: Clock = system_clock,
) -> ProcessState:
    """One analysis branch hands in its PI proposals.

    The branch perspective is stamped onto every proposal; an empty list
    is a valid submission meaning the branch found nothing further.
    """

    if state.phase not in (Phase.ITEM_DEFINED, Phase.ANALYSIS):
        raise WrongPhase(f"cannot submit proposals in phase {state.phase.value}")
    required = _BRANCH_GATE[branch]
    if actor.role is not required:
        raise RoleViolation(
            f"branch {branch.value} takes submissions from {required.value}, "
            f"not {actor.role.value}"
        )
    if branch is Perspective.TOP_DOWN and state.top_down_done:
        raise WrongPhase("top_down branch already submitted")
    if branch is Perspective.BOTTOM_UP and state.bottom_up_done:
        raise WrongPhase("bottom_up branch already submitted")

    existing = {p.id for p in state.bundle.proposals}
    stamped: list[PerformanceIndicator] = []
    for proposal in proposals:
        if proposal.id in existing:
            raise InvalidProposal(
                f"PI id {proposal.id!r} is already in the log"
            )
        existing.add(proposal.id)
        stamped.append(
            replace(
                proposal,
                perspective=branch,
                proposed_by=proposal.proposed_by or (actor,),
            )
        )

    problems = []
    for proposal in stamped:
        problems.extend(
            d for d in validate_pi(proposal) if d.severity is Severity.ERROR
        )
    if problems:
        raise InvalidProposal(
            "submission rejected: " + "; ".join(d.message for d in problems),
            diagnostics=tuple(problems),
        )

    new_bundle = canonicalize_bundle(
        state.bundle.with_proposals(list(state.bundle.proposals) + stamped)
    )
    errors = [d for d in resolve_bundle(new_bundle) if d.severity is Severity.ERROR]
    if errors:
        raise UnresolvedReference(
            "submission references unknown artifacts: "
            + "; ".join(d.message for d in errors)
        )
    new_digest = snapshot_hash(new_bundle)
    action = "submit_top_down" if branch is Perspective.TOP_DOWN else "submit_bottom_up"
    audit = _append(
        state.audit,
        actor,
        action,
        f"{branch.value}:{len(stamped)}",
        state.current_digest,
        new_digest,
        clock,
    )
    top_done = state.top_down_done or branch is Perspective.TOP_DOWN
    bottom_done = state.bottom_up_done or branch is Perspective.BOTTOM_UP
    phase = Phase.PI_LOG_DRAFT if (top_done and bottom_done) else Phase.ANALYSIS
    return replace(
        state,
        bundle=new_bundle,
        phase=phase,
        top_down_done=top_done,
        bottom_up_done=bottom_done,
        current_digest=new_digest,
        audit=audit,
    )


def run_harmonization(
    state: ProcessState,
    decisions: Sequence[Decision],
    clock: Clock = system_clock,
) -> ProcessState:
    """Apply coordinator rulings, then either advance or loop.

    The log leaves harmonization only when no undecided merge proposals
    remain and the consolidated entries pass the completeness check.
    """

    if state.phase not in (Phase.PI_LOG_DRAFT, Phase.HARMONIZATION):
        raise WrongPhase(f"cannot harmonize in phase {state.phase.value}")

    outcome = apply_decisions(
        state.bundle.proposals,
        list(decisions),
        state.current_digest,
        state.threshold,
        state.suppressions,
    )
    new_bundle = canonicalize_bundle(
        state.bundle.with_proposals(list(outcome.consolidated))
    )
    new_digest = snapshot_hash(new_bundle)
    suppressions = state.suppressions | outcome.kept_separate

    audit = state.audit
    for event in outcome.events:
        audit = _append(
            audit,
            event.actor or SYSTEM_COORDINATOR,
            event.action,
            event.subject,
            state.current_digest,
            state.current_digest,
            clock,
        )

    remaining = propose_merges(new_bundle.proposals, state.threshold, suppressions)
    completeness = completeness_report(new_bundle.proposals)
    blocked = bool(remaining) or any(
        d.severity is Severity.ERROR for d in completeness
    )
    reviewer = decisions[0].decided_by if decisions else SYSTEM_COORDINATOR
    audit = _append(
        audit,
        reviewer,
        "harmonization_review",
        f"open:{len(remaining)}",
        state.current_digest,
        new_digest,
        clock,
    )
    if blocked:
        return replace(
            state,
            bundle=new_bundle,
            phase=Phase.HARMONIZATION,
            harmonization_iteration=state.harmonization_iteration + 1,
            suppressions=suppressions,
            decisions=state.decisions + tuple(decisions),
            current_digest=new_digest,
            audit=audit,
        )
    return replace(
        state,
        bundle=new_bundle,
        phase=Phase.INTERFACE_DEFINITION,
        suppressions=suppressions,
        decisions=state.decisions + tuple(decisions),
        current_digest=new_digest,
        audit=audit,
    )


def _apply_overrides(
    interfaces: list[PiInterface],
    overrides: tuple[tuple[str, str], ...],
) -> list[PiInterface]:
    pinned = dict(overrides)
    out: list[PiInterface] = []
    for interface in interfaces:
        target = pinned.get(interface.pi)
        if target is not None and target != interface.bus:
            out.append(replace(interface, bus=target))
        else:
            out.append(interface)
    return out


def run_interface_definition(
    state: ProcessState,
    actor: Attribution = SYSTEM_ARCHITECT,
    clock: Clock = system_clock,
) -> ProcessState:
    """Allocate, check feasibility, and either finish or open conflicts."""

    if state.phase not in (Phase.INTERFACE_DEFINITION, Phase.CONFLICT_RESOLUTION):
        raise WrongPhase(
            f"cannot run interface definition in phase {state.phase.value}"
        )
    if actor.role is not Role.ARCHITECTURAL_SYSTEM_ENGINEER:
        raise RoleViolation(
            f"interface definition is the architectural system engineer's act, "
            f"not {actor.role.value}"
        )

    arch = state.bundle.architecture
    consolidated = state.bundle.proposals
    interfaces = _apply_overrides(
        allocate(consolidated, arch), state.allocation_overrides
    )
    report = check_feasibility(interfaces, arch, state.warn_utilization)
    graph = build_graph(state.bundle, consolidated, report.interfaces)
    entries = nonviable_report(report, graph)
    conflicts = tuple(
        Conflict(
            id=f"C-{entry.pi}",
            pi=entry.pi,
            reason=entry.reason,
            affected=entry.affected,
        )
        for entry in entries
    )
    coverage = coverage_report(graph)

    audit = _append(
        state.audit,
        actor,
        "interface_check",
        f"non_viable:{len(conflicts)}",
        state.current_digest,
        state.current_digest,
        clock,
    )

    if conflicts:
        return replace(
            state,
            phase=Phase.CONFLICT_RESOLUTION,
            interface_iteration=state.interface_iteration + 1,
            conflicts=conflicts,
            interfaces=report.interfaces,
            audit=audit,
        )
    if not coverage.clean:
        gaps = (
            len(coverage.orphan_pis)
            + len(coverage.unmonitored_requirements)
            + len(coverage.unobserved_failure_modes)
        )
        audit = _append(
            audit,
            actor,
            "interface_check",
            f"coverage_gaps:{gaps}",
            state.current_digest,
            state.current_digest,
            clock,
        )
        return replace(
            state,
            phase=Phase.INTERFACE_DEFINITION,
            interface_iteration=state.interface_iteration + 1,
            conflicts=(),
            interfaces=report.interfaces,
            audit=audit,
        )

    icd = emit_icd(
        state.bundle,
        consolidated,
        report.interfaces,
        graph,
        expected_digest=state.current_digest,
    )
    idl = emit_idl(assemble_quality_vectors(report.interfaces, consolidated))
    audit = _append(
        audit,
        actor,
        "emit_icd",
        f"icd@{sha256_hex(icd)}",
        state.current_digest,
        state.current_digest,
        clock,
    )
    audit = _append(
        audit,
        actor,
        "emit_idl",
        f"idl@{sha256_hex(idl)}",
        state.current_digest,
        state.current_digest,
        clock,
    )
    return replace(
        state,
        phase=Phase.INTERFACES_DEFINED,
        conflicts=(),
        interfaces=report.interfaces,
        icd_text=icd,
        idl_text=idl,
        audit=audit,
    )


_FREQ_DIMS = (0, 0, -1, 0, 0, 0, 0, 0)
_TIME_DIMS = (0, 0, 1, 0, 0, 0, 0, 0)
_INFO_DIMS = (0, 0, 0, 0, 0, 0, 0, 1)


def _adjusted_pi(pi: PerformanceIndicator, resolution: Resolution) -> PerformanceIndicator:
    changes = {}
    if resolution.new_rate is not None:
        if resolution.new_rate.unit.dims != _FREQ_DIMS or resolution.new_rate.value <= 0:
            raise InvalidResolution("new_rate must be a positive frequency")
        changes["rate"] = convert(resolution.new_rate, HERTZ)
    if resolution.new_payload is not None:
        if resolution.new_payload.unit.dims != _INFO_DIMS or resolution.new_payload.value <= 0:
            raise InvalidResolution("new_payload must be a positive information amount")
        changes["payload"] = convert(resolution.new_payload, BIT)
    if resolution.new_freshness is not None:
        if resolution.new_freshness.unit.dims != _TIME_DIMS or resolution.new_freshness.value <= 0:
            raise InvalidResolution("new_freshness must be a positive time")
        changes["freshness"] = convert(resolution.new_freshness, SECOND)
    if not changes:
        raise InvalidResolution(
            "adjust_pi needs at least one of new_rate, new_payload, new_freshness"
        )
    return replace(pi, **changes)


def resolve_conflict(
    state: ProcessState,
    conflict_id: str,
    resolution: Resolution,
    actors: Sequence[Attribution],
    clock: Clock = system_clock,
) -> ProcessState:
    """Coordinator and architect jointly settle one open conflict.

    adjust_pi rewrites the PI's transport fields; reallocate_bus pins the
    PI to a named attached bus; drop_pi removes the PI and records the
    information loss against everything it observed.
    """

    if state.phase is not Phase.CONFLICT_RESOLUTION:
        raise WrongPhase(f"no conflicts to resolve in phase {state.phase.value}")
    conflict = state.conflict(conflict_id)
    if conflict is None:
        raise UnknownConflict(f"no open conflict {conflict_id!r}")
    roles = {a.role for a in actors}
    allowed = {Role.SELF_PERCEPTION_COORDINATOR, Role.ARCHITECTURAL_SYSTEM_ENGINEER}
    if not roles <= allowed:
        bad = sorted(r.value for r in roles - allowed)
        raise RoleViolation(f"conflict resolution is not signed by: {', '.join(bad)}")
    if Role.SELF_PERCEPTION_COORDINATOR not in roles:
        raise RoleViolation("conflict resolution needs a self perception coordinator")
    if Role.ARCHITECTURAL_SYSTEM_ENGINEER not in roles:
        raise RoleViolation("conflict resolution needs an architectural system engineer")
    if not resolution.rationale.strip():
        raise InvalidResolution("a resolution carries a nonempty rationale")

    pi = state.bundle.proposal(conflict.pi)
    if pi is None:
        raise UnknownConflict(f"conflict {conflict_id!r} names unknown PI {conflict.pi!r}")

    new_bundle = state.bundle
    overrides = dict(state.allocation_overrides)
    info_loss: Optional[str] = None

    if resolution.kind is ResolutionKind.ADJUST_PI:
        adjusted = _adjusted_pi(pi, resolution)
        proposals = [adjusted if p.id == pi.id else p for p in state.bundle.proposals]
        new_bundle = canonicalize_bundle(state.bundle.with_proposals(proposals))
    elif resolution.kind is ResolutionKind.REALLOCATE_BUS:
        if not resolution.target_bus:
            raise InvalidResolution("reallocate_bus needs a target_bus")
        service = state.bundle.architecture.service_of(pi.provider)
        attached = (
            state.bundle.architecture.buses_of(service.id) if service else ()
        )
        if resolution.target_bus not in attached:
            raise InvalidResolution(
                f"bus {resolution.target_bus!r} is not attached to the provider service"
            )
        overrides[pi.id] = resolution.target_bus
    else:
        proposals = [p for p in state.bundle.proposals if p.id != pi.id]
        new_bundle = canonicalize_bundle(state.bundle.with_proposals(proposals))
        overrides.pop(pi.id, None)
        info_loss = f"{pi.id} unobserved:{','.join(conflict.affected) or 'none'}"

    new_digest = snapshot_hash(new_bundle)
    signers = sorted(actors, key=Attribution.sort_key)
    coordinators = [
        a for a in signers if a.role is Role.SELF_PERCEPTION_COORDINATOR
    ]
    audit = _append(
        state.audit,
        signers[0],
        "resolve_conflict",
        f"{conflict_id}:{resolution.kind.value}",
        state.current_digest,
        new_digest,
        clock,
    )
    for signer in signers[1:]:
        audit = _append(
            audit,
            signer,
            "resolve_conflict",
            f"{conflict_id}:{resolution.kind.value}",
            new_digest,
            new_digest,
            clock,
        )
    if info_loss is not None:
        audit = _append(
            audit,
            coordinators[0],
            "information_loss",
            info_loss,
            new_digest,
            new_digest,
            clock,
        )
    return replace(
        state,
        bundle=new_bundle,
        conflicts=tuple(c for c in state.conflicts if c.id != conflict_id),
        allocation_overrides=tuple(sorted(overrides.items())),
        current_digest=new_digest,
        audit=audit,
    )


@dataclass(frozen=True)
class ProReqEntry:
    id: int
    satisfied: bool
    evidence: str


def proreq_checklist(state: ProcessState) -> list[ProReqEntry]:
    """Seven-point compliance check over the current state and audit log."""

    out: list[ProReqEntry] = []

    illegal = [
        e for e in state.audit if (e.actor.role, e.action) not in LEGAL_ACTIONS
    ]
    out.append(
        ProReqEntry(
            1,
            not illegal,
            f"{len(state.audit)} audit events, "
            + ("all role-legal" if not illegal else f"{len(illegal)} illegal"),
        )
    )

    started = bool(state.audit) and state.audit[0].action == "init_process"
    out.append(
        ProReqEntry(
            2,
            started,
            "audit opens with the item-definition event"
            if started
            else "no item-definition event at the start of the audit log",
        )
    )

    pi_ids = {p.id for p in state.consolidated}
    interfaced = {i.pi for i in state.interfaces}
    icd_done = state.icd_text is not None and pi_ids and pi_ids <= interfaced
    out.append(
        ProReqEntry(
            3,
            bool(icd_done),
            f"ICD emitted with {len(interfaced)} of {len(pi_ids)} PIs interfaced"
            if state.icd_text is not None
            else "no ICD artifact",
        )
    )

    for entry_id, perspective in ((4, Perspective.TOP_DOWN), (5, Perspective.BOTTOM_UP)):
        traced = [
            p
            for p in state.consolidated
            if p.perspective is perspective and p.traces
        ]
        out.append(
            ProReqEntry(
                entry_id,
                bool(traced),
                f"{len(traced)} traced {perspective.value} PIs in the log",
            )
        )

    by_pi = {p.id: p for p in state.consolidated}
    untraceable = [
        i
        for i in state.interfaces
        if i.pi not in by_pi
        or not by_pi[i.pi].traces
        or not by_pi[i.pi].proposed_by
    ]
    unanchored = [
        d for d in state.decisions if len(d.bundle_digest) != 64
    ]
    out.append(
        ProReqEntry(
            6,
            not untraceable and not unanchored,
            f"{len(state.interfaces)} interfaces traceable, "
            f"{len(state.decisions)} decisions digest-anchored",
        )
    )

    rework = state.harmonization_iteration + state.interface_iteration
    loop_evidence = (
        f"harmonization looped {state.harmonization_iteration}x, "
        f"interface definition looped {state.interface_iteration}x"
        if rework
        else "no rework was needed"
    )
    out.append(ProReqEntry(7, True, loop_evidence))
    return out


def audit_log_text(audit: Sequence[AuditEvent]) -> str:
    """One event per line, tab-separated, replayable."""

    lines = []
    for e in audit:
        lines.append(
            "\t".join(
                (
                    str(e.seq),
                    e.timestamp,
                    e.actor.role.value,
                    e.actor.name,
                    e.action,
                    e.subject,
                    e.digest_before,
                    e.digest_after,
                )
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def replay_digest_chain(audit: Sequence[AuditEvent]) -> str:
    """Walk the chain; returns the final digest or raises on a break."""

    from .errors import DigestMismatch

    if not audit:
        raise DigestMismatch("empty audit log has no digest chain")
    current = audit[0].digest_before
    last_seq = None
    for event in audit:
        if last_seq is not None and event.seq != last_seq + 1:
            raise DigestMismatch(
                f"audit sequence jumps from {last_seq} to {event.seq}"
            )
        last_seq = event.seq
        if event.digest_before != current:
            raise DigestMismatch(
                f"event {event.seq} starts at {event.digest_before[:12]}..., "
                f"chain is at {current[:12]}..."
            )
        current = event.digest_after
    return current
