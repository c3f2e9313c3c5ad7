"""Domain types for the PI Log and its surrounding project state.

Everything here is an immutable value.  Invariants that stakeholders can
violate (bad ranges, thin descriptions, missing uncertainty) are reported
by :func:`validate_pi` as diagnostics; invariants that would make a value
meaningless (non-finite numbers, malformed uncertainty specs) raise at
construction time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .diagnostics import Diagnostic, Severity
from .units import (
    DIMENSIONLESS,
    Quantity,
    UnitVector,
    convert,
    units_compatible,
)

_TIME_DIMS = (0, 0, 1, 0, 0, 0, 0, 0)
_FREQ_DIMS = (0, 0, -1, 0, 0, 0, 0, 0)
_INFO_DIMS = (0, 0, 0, 0, 0, 0, 0, 1)

PI_ID_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)*$")

MIN_DESCRIPTION_LENGTH = 10


class Role(str, Enum):
    SELF_PERCEPTION_COORDINATOR = "self_perception_coordinator"
    SAFETY_ENGINEER = "safety_engineer"
    ARCHITECTURAL_SYSTEM_ENGINEER = "architectural_system_engineer"
    FUNCTION_EXPERT = "function_expert"


class Perspective(str, Enum):
    TOP_DOWN = "top_down"
    BOTTOM_UP = "bottom_up"


class Effect(str, Enum):
    DEGRADATION = "degradation"
    FAILURE = "failure"


class AnalysisMethod(str, Enum):
    FMEA = "fmea"
    HAZOP = "hazop"
    STPA = "stpa"
    EXPERT_JUDGMENT = "expert_judgment"


class UncertaintyKind(str, Enum):
    NONE_DECLARED = "none_declared"
    INTERVAL = "interval"
    STANDARD_DEVIATION = "standard_deviation"
    QUALITATIVE = "qualitative"


@dataclass(frozen=True)
class Attribution:
    """A stakeholder: role plus a free-text name label."""

    role: Role
    name: str

    def sort_key(self) -> tuple[str, str]:
        return (self.role.value, self.name)


@dataclass(frozen=True)
class UncertaintySpec:
    kind: UncertaintyKind = UncertaintyKind.NONE_DECLARED
    magnitude: Optional[float] = None
    note: Optional[str] = None

    def __post_init__(self) -> None:
        quantitative = self.kind in (
            UncertaintyKind.INTERVAL,
            UncertaintyKind.STANDARD_DEVIATION,
        )
        if quantitative:
            if self.magnitude is None or self.magnitude < 0:
                raise ValueError(f"{self.kind.value} uncertainty needs magnitude >= 0")
        elif self.magnitude is not None:
            raise ValueError(f"{self.kind.value} uncertainty carries no magnitude")
        if self.kind is UncertaintyKind.QUALITATIVE:
            if not self.note:
                raise ValueError("qualitative uncertainty needs a note")
        elif self.note is not None:
            raise ValueError(f"{self.kind.value} uncertainty carries no note")

    @property
    def is_quantitative(self) -> bool:
        return self.magnitude is not None


NO_UNCERTAINTY = UncertaintySpec()


@dataclass(frozen=True)
class ValueRange:
    """Closed interval [lo, hi]; both ends share one unit."""

    lo: Quantity
    hi: Quantity

    def __post_init__(self) -> None:
        if self.lo.unit != self.hi.unit:
            raise ValueError("range endpoints must share one unit")

    @property
    def unit(self) -> UnitVector:
        return self.lo.unit

    def converted(self, target: UnitVector) -> "ValueRange":
        return ValueRange(convert(self.lo, target), convert(self.hi, target))

    def intersect(self, other: "ValueRange") -> Optional["ValueRange"]:
        """Intersection in self's unit, or None when disjoint."""
        o = other.converted(self.unit)
        lo = max(self.lo.value, o.lo.value)
        hi = min(self.hi.value, o.hi.value)
        if lo > hi:
            return None
        return ValueRange(Quantity(lo, self.unit), Quantity(hi, self.unit))

    def overlaps(self, other: "ValueRange") -> bool:
        return self.intersect(other) is not None


@dataclass(frozen=True)
class PerformanceIndicator:
    """One PI Log entry.

    ``proposed_by`` holds every stakeholder that (co-)proposed the entry;
    fresh proposals carry exactly one attribution and merging unions them.
    ``traces`` references SafetyRequirement and/or FailureMode ids.
    """

    id: str
    description: str
    unit: UnitVector
    range: ValueRange
    perspective: Perspective
    proposed_by: tuple[Attribution, ...]
    provider: str
    rate: Quantity
    payload: Quantity
    freshness: Quantity
    uncertainty: UncertaintySpec = NO_UNCERTAINTY
    traces: frozenset[str] = frozenset()
    proxy_for: Optional[str] = None
    integral: bool = False
    merged_from: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str


@dataclass(frozen=True)
class SafetyRequirement:
    id: str
    statement: str
    scenario: str
    hazard: Optional[str] = None
    granularity: int = 0
    parent: Optional[str] = None
    needs_runtime_monitoring: bool = False


@dataclass(frozen=True)
class FailureMode:
    id: str
    function: str
    mechanism: str
    effect: Effect
    method: AnalysisMethod


@dataclass(frozen=True)
class Service:
    id: str
    functions: tuple[str, ...]
    placement: str = ""


@dataclass(frozen=True)
class Bus:
    id: str
    capacity: Quantity  # bit/s
    base_latency: Quantity  # s
    placement: Optional[str] = None  # exact-match restriction tag


@dataclass(frozen=True)
class ArchitectureModel:
    services: tuple[Service, ...] = ()
    buses: tuple[Bus, ...] = ()
    attachments: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def service_of(self, function_id: str) -> Optional[Service]:
        for service in self.services:
            if function_id in service.functions:
                return service
        return None

    def service(self, service_id: str) -> Optional[Service]:
        for service in self.services:
            if service.id == service_id:
                return service
        return None

    def bus(self, bus_id: str) -> Optional[Bus]:
        for bus in self.buses:
            if bus.id == bus_id:
                return bus
        return None

    def buses_of(self, service_id: str) -> tuple[str, ...]:
        return self.attachments.get(service_id, ())

    @property
    def is_empty(self) -> bool:
        return not self.services and not self.buses


@dataclass(frozen=True)
class ItemDefinition:
    name: str = ""
    use_cases: tuple[str, ...] = ()
    scenarios: tuple[Scenario, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.name and not self.use_cases and not self.scenarios


@dataclass(frozen=True)
class ItemBundle:
    item: ItemDefinition = ItemDefinition()
    architecture: ArchitectureModel = ArchitectureModel()
    requirements: tuple[SafetyRequirement, ...] = ()
    failure_modes: tuple[FailureMode, ...] = ()
    proposals: tuple[PerformanceIndicator, ...] = ()

    def requirement(self, rid: str) -> Optional[SafetyRequirement]:
        for req in self.requirements:
            if req.id == rid:
                return req
        return None

    def failure_mode(self, fid: str) -> Optional[FailureMode]:
        for fm in self.failure_modes:
            if fm.id == fid:
                return fm
        return None

    def proposal(self, pid: str) -> Optional[PerformanceIndicator]:
        for pi in self.proposals:
            if pi.id == pid:
                return pi
        return None

    def scenario(self, sid: str) -> Optional[Scenario]:
        for sc in self.item.scenarios:
            if sc.id == sid:
                return sc
        return None

    def with_proposals(self, proposals: list[PerformanceIndicator]) -> "ItemBundle":
        ordered = tuple(sorted(proposals, key=lambda p: p.id))
        return replace(self, proposals=ordered)


def _diag(
    severity: Severity,
    code: str,
    message: str,
    *,
    field_name: Optional[str] = None,
    role: Optional[Role] = None,
    stakeholder: Optional[str] = None,
) -> Diagnostic:
    return Diagnostic(
        severity=severity,
        code=code,
        message=message,
        field=field_name,
        responsible_role=role,
        stakeholder=stakeholder,
    )


def validate_pi(pi: PerformanceIndicator) -> list[Diagnostic]:
    """Completeness and consistency check for one PI Log entry.

    Returns an empty list iff every structural invariant holds and the
    description is substantial enough to discuss.  Each diagnostic names
    the stakeholder to query for the missing information.
    """

    out: list[Diagnostic] = []
    proposer = pi.proposed_by[0] if pi.proposed_by else None
    p_role = proposer.role if proposer else None
    p_name = proposer.name if proposer else None

    def err(code: str, message: str, field_name: str) -> None:
        out.append(
            _diag(Severity.ERROR, code, message,
                  field_name=field_name, role=p_role, stakeholder=p_name)
        )

    if not PI_ID_RE.match(pi.id):
        err("E_PI_ID", f"PI id {pi.id!r} is not dot-separated lowercase segments", "id")
    if len(pi.description.strip()) < MIN_DESCRIPTION_LENGTH:
        err(
            "E_DESCRIPTION_SHORT",
            f"description of {pi.id!r} is lacking "
            f"(< {MIN_DESCRIPTION_LENGTH} characters)",
            "description",
        )
    if not pi.proposed_by:
        err("E_NO_PROPOSER", f"{pi.id!r} names no proposing stakeholder", "proposed_by")

    if not units_compatible(pi.range.unit, pi.unit):
        err(
            "E_RANGE_DIMS",
            f"range of {pi.id!r} does not share the PI's unit dimensions",
            "range",
        )
    if pi.range.lo.value > pi.range.hi.value:
        err("E_RANGE_ORDER", f"range of {pi.id!r} has min > max", "range")

    for name, quantity, dims in (
        ("rate", pi.rate, _FREQ_DIMS),
        ("payload", pi.payload, _INFO_DIMS),
        ("freshness", pi.freshness, _TIME_DIMS),
    ):
        if quantity.unit.dims != dims:
            err(f"E_{name.upper()}_UNIT", f"{name} of {pi.id!r} has wrong dimensions", name)
        elif quantity.value <= 0:
            err(f"E_{name.upper()}_POSITIVE", f"{name} of {pi.id!r} must be > 0", name)

    if pi.id in pi.merged_from:
        err("E_MERGED_SELF", f"{pi.id!r} lists itself in merged_from", "merged_from")

    if pi.uncertainty.kind is UncertaintyKind.NONE_DECLARED:
        # Name the proposer only when they hold the role the query goes to.
        expert = p_name if p_role is Role.FUNCTION_EXPERT else None
        out.append(
            _diag(
                Severity.WARNING,
                "W_UNCERTAINTY_UNDECLARED",
                f"uncertainty of {pi.id!r} not declared; request from function expert",
                field_name="uncertainty",
                role=Role.FUNCTION_EXPERT,
                stakeholder=expert,
            )
        )
    return out


def resolve_bundle(bundle: ItemBundle) -> list[Diagnostic]:
    """Cross-reference check: ids unique per category, every reference resolves."""

    out: list[Diagnostic] = []

    def err(code: str, message: str) -> None:
        out.append(_diag(Severity.ERROR, code, message))

    def check_unique(kind: str, ids: list[str]) -> None:
        seen: set[str] = set()
        for entry in ids:
            if entry in seen:
                err("E_DUPLICATE_ID", f"duplicate {kind} id {entry!r}")
            seen.add(entry)

    check_unique("scenario", [s.id for s in bundle.item.scenarios])
    check_unique("service", [s.id for s in bundle.architecture.services])
    check_unique("bus", [b.id for b in bundle.architecture.buses])
    check_unique("requirement", [r.id for r in bundle.requirements])
    check_unique("failure_mode", [f.id for f in bundle.failure_modes])
    check_unique("pi", [p.id for p in bundle.proposals])

    functions: dict[str, str] = {}
    for service in bundle.architecture.services:
        for fn in service.functions:
            if fn in functions:
                err(
                    "E_FUNCTION_OWNERSHIP",
                    f"function {fn!r} belongs to both {functions[fn]!r} and {service.id!r}",
                )
            functions[fn] = service.id

    bus_ids = {b.id for b in bundle.architecture.buses}
    service_ids = {s.id for s in bundle.architecture.services}
    for service in bundle.architecture.services:
        attached = bundle.architecture.buses_of(service.id)
        if not attached:
            err("E_NO_BUS", f"service {service.id!r} attaches to no bus")
        for bus_id in attached:
            if bus_id not in bus_ids:
                err("E_UNRESOLVED_REF", f"service {service.id!r} attaches to unknown bus {bus_id!r}")
    for sid in bundle.architecture.attachments:
        if sid not in service_ids:
            err("E_UNRESOLVED_REF", f"attachment names unknown service {sid!r}")

    for bus in bundle.architecture.buses:
        if bus.capacity.unit.dims != (0, 0, -1, 0, 0, 0, 0, 1):
            err("E_BUS_CAPACITY_UNIT", f"bus {bus.id!r} capacity is not bit/s")
        elif bus.capacity.value <= 0:
            err("E_BUS_CAPACITY", f"bus {bus.id!r} capacity must be > 0")
        if bus.base_latency.unit.dims != _TIME_DIMS:
            err("E_BUS_LATENCY_UNIT", f"bus {bus.id!r} base latency is not a time")
        elif bus.base_latency.value < 0:
            err("E_BUS_LATENCY", f"bus {bus.id!r} base latency must be >= 0")

    scenario_ids = {s.id for s in bundle.item.scenarios}
    requirement_ids = {r.id for r in bundle.requirements}
    failure_ids = {f.id for f in bundle.failure_modes}

    for req in bundle.requirements:
        if req.scenario not in scenario_ids:
            err("E_UNRESOLVED_REF", f"requirement {req.id!r} names unknown scenario {req.scenario!r}")
        if req.parent is not None and req.parent not in requirement_ids:
            err("E_UNRESOLVED_REF", f"requirement {req.id!r} names unknown parent {req.parent!r}")

    # Parent chains must terminate; granularity is depth along the chain.
    by_id = {r.id: r for r in bundle.requirements}
    for req in bundle.requirements:
        seen = {req.id}
        cursor = req.parent
        while cursor is not None:
            if cursor in seen:
                err("E_REQUIREMENT_CYCLE", f"requirement {req.id!r} has a cyclic parent chain")
                break
            seen.add(cursor)
            parent = by_id.get(cursor)
            cursor = parent.parent if parent else None

    for fm in bundle.failure_modes:
        if fm.function not in functions:
            err("E_UNRESOLVED_REF", f"failure mode {fm.id!r} names unknown function {fm.function!r}")

    for pi in bundle.proposals:
        if pi.provider not in functions:
            err("E_UNRESOLVED_REF", f"PI {pi.id!r} provider {pi.provider!r} is not a known function")
        for trace in sorted(pi.traces):
            if trace not in requirement_ids and trace not in failure_ids:
                err("E_UNRESOLVED_REF", f"PI {pi.id!r} traces unknown artifact {trace!r}")
        for absorbed in sorted(pi.merged_from):
            if absorbed == pi.id:
                err("E_MERGED_SELF", f"PI {pi.id!r} lists itself in merged_from")

    return out


def requirement_granularity(bundle: ItemBundle, rid: str) -> int:
    """Decomposition depth: root requirements sit at 0."""
    depth = 0
    seen = {rid}
    req = bundle.requirement(rid)
    while req is not None and req.parent is not None and req.parent not in seen:
        seen.add(req.parent)
        depth += 1
        req = bundle.requirement(req.parent)
    return depth
