"""Interface synthesis: allocation, feasibility, quality vectors, ICD, IDL.

One PI becomes one interface; integrated interfaces are then grouped into
one quality-vector message per providing service.  Every payload carries
a fixed 64-bit timestamp header, since freshness without a timestamp is
unverifiable.  Feasibility failures never raise; they become report
content that feeds the conflict-resolution loop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .canonical import render_number, snapshot_hash
from .errors import DigestMismatch, InvalidThreshold, UnhostedFunction
from .graph import NodeKind, TraceGraph
from .model import (
    ArchitectureModel,
    ItemBundle,
    PerformanceIndicator,
    UncertaintyKind,
)
from .units import (
    BIT_PER_SECOND,
    HERTZ,
    SECOND,
    Quantity,
    canonical_unit,
    convert,
    render_unit,
)

HEADER_BITS = 64  # fixed per-message timestamp header

WARN_UTILIZATION = 0.8

_FLOAT32_EXACT = float(2**24)  # largest magnitude float32 resolves to 1.0
_UINT32_MAX = float(2**32 - 1)
_INT32_MIN = float(-(2**31))
_INT32_MAX = float(2**31 - 1)


class Encoding(str, Enum):
    FLOAT64 = "float64"
    FLOAT32 = "float32"
    UINT8_BOOL = "uint8_bool"
    UINT32 = "uint32"
    INT32 = "int32"


ENCODING_WIDTH: dict[Encoding, int] = {
    Encoding.FLOAT64: 64,
    Encoding.FLOAT32: 32,
    Encoding.UINT8_BOOL: 8,
    Encoding.UINT32: 32,
    Encoding.INT32: 32,
}


class InterfaceStatus(str, Enum):
    PROPOSED = "proposed"
    INTEGRATED = "integrated"
    NON_VIABLE = "non_viable"


class Verdict(str, Enum):
    OK = "ok"
    WARN = "warn"
    FAIL = "fail"


@dataclass(frozen=True)
class PiInterface:
    id: str
    pi: str
    provider_service: str
    bus: str
    encoding: Encoding
    rate: Quantity  # Hz
    payload_bits: int
    freshness: Quantity  # s
    status: InterfaceStatus = InterfaceStatus.PROPOSED


def interface_id(pi_id: str) -> str:
    return f"if.{pi_id}"


def choose_encoding(pi: PerformanceIndicator) -> Encoding:
    """Decision table from range, unit, integer declaration, and precision.

    Real-valued PIs take float32 unless the range magnitude exceeds what
    float32 resolves exactly, or a declared quantitative uncertainty is
    finer than one part in 1e6 of the range magnitude.
    """

    rng = pi.range.converted(canonical_unit(pi.unit))
    lo, hi = rng.lo.value, rng.hi.value
    if pi.integral:
        if pi.unit.is_dimensionless and lo >= 0.0 and hi <= 1.0:
            return Encoding.UINT8_BOOL
        if lo >= 0.0 and hi <= _UINT32_MAX:
            return Encoding.UINT32
        if lo >= _INT32_MIN and hi <= _INT32_MAX:
            return Encoding.INT32
        return Encoding.FLOAT64
    max_abs = max(abs(lo), abs(hi))
    if max_abs > _FLOAT32_EXACT:
        return Encoding.FLOAT64
    unc = pi.uncertainty
    if unc.is_quantitative and unc.magnitude:
        if 0.0 < unc.magnitude < max_abs * 1e-6:
            return Encoding.FLOAT64
    return Encoding.FLOAT32


def payload_bits_for(encoding: Encoding) -> int:
    return ENCODING_WIDTH[encoding] + HEADER_BITS


def allocate(
    consolidated: Sequence[PerformanceIndicator],
    arch: ArchitectureModel,
) -> list[PiInterface]:
    """One proposed interface per PI, on the cheapest attached bus.

    PIs are placed in id order; each goes to the attached bus whose
    utilization after placement is lowest (ties to the smaller bus id),
    so equal inputs always give the same allocation.
    """

    load: dict[str, float] = {bus.id: 0.0 for bus in arch.buses}
    out: list[PiInterface] = []
    for pi in sorted(consolidated, key=lambda p: p.id):
        service = arch.service_of(pi.provider)
        if service is None:
            raise UnhostedFunction(
                f"PI {pi.id!r}: provider function {pi.provider!r} is hosted on no service"
            )
        attached = arch.buses_of(service.id)
        if not attached:
            raise UnhostedFunction(
                f"PI {pi.id!r}: service {service.id!r} attaches to no bus"
            )
        encoding = choose_encoding(pi)
        bits = payload_bits_for(encoding)
        rate = convert(pi.rate, HERTZ)

        def resulting_utilization(bus_id: str) -> float:
            bus = arch.bus(bus_id)
            if bus is None:
                raise UnhostedFunction(
                    f"PI {pi.id!r}: service {service.id!r} attaches to unknown bus {bus_id!r}"
                )
            capacity = convert(bus.capacity, BIT_PER_SECOND).value
            return (load[bus_id] + bits * rate.value) / capacity

        best = min(sorted(attached), key=lambda b: (resulting_utilization(b), b))
        load[best] += bits * rate.value
        out.append(
            PiInterface(
                id=interface_id(pi.id),
                pi=pi.id,
                provider_service=service.id,
                bus=best,
                encoding=encoding,
                rate=rate,
                payload_bits=bits,
                freshness=convert(pi.freshness, SECOND),
                status=InterfaceStatus.PROPOSED,
            )
        )
    return out


@dataclass(frozen=True)
class InterfaceVerdict:
    interface: str
    verdict: Verdict
    reason: str


@dataclass(frozen=True)
class FeasibilityReport:
    loads: tuple[tuple[str, float], ...]  # (bus id, bit/s), sorted
    utilization: tuple[tuple[str, float], ...]
    verdicts: tuple[InterfaceVerdict, ...]
    non_viable: tuple[tuple[str, str], ...]  # (PI id, reason)
    interfaces: tuple[PiInterface, ...]  # statuses updated

    @property
    def ok(self) -> bool:
        return not self.non_viable


def check_feasibility(
    interfaces: Sequence[PiInterface],
    arch: ArchitectureModel,
    warn_utilization: float = WARN_UTILIZATION,
) -> FeasibilityReport:
    """Bandwidth, timing, and placement checks over allocated interfaces.

    Bandwidth: per-bus load = sum of payload_bits x rate; an overloaded
    bus fails every interface riding it.  Timing: one period plus
    transmission latency plus base latency must fit inside freshness.
    Placement: provider service and bus tags must match exactly when both
    declare one.
    """

    if warn_utilization <= 0.0:
        raise InvalidThreshold(
            f"warn_utilization must be positive, got {warn_utilization}"
        )
    capacities = {
        bus.id: convert(bus.capacity, BIT_PER_SECOND).value for bus in arch.buses
    }
    latencies = {
        bus.id: convert(bus.base_latency, SECOND).value for bus in arch.buses
    }
    load: dict[str, float] = {bus.id: 0.0 for bus in arch.buses}
    for interface in interfaces:
        rate_hz = convert(interface.rate, HERTZ).value
        load[interface.bus] = load.get(interface.bus, 0.0) + (
            interface.payload_bits * rate_hz
        )
    utilization: dict[str, float] = {}
    for bus in arch.buses:
        utilization[bus.id] = load[bus.id] / capacities[bus.id]

    verdicts: list[InterfaceVerdict] = []
    non_viable: list[tuple[str, str]] = []
    updated: list[PiInterface] = []
    for interface in sorted(interfaces, key=lambda i: i.id):
        bus = arch.bus(interface.bus)
        reasons: list[str] = []
        warn_reasons: list[str] = []
        if bus is None:
            reasons.append(f"bus {interface.bus!r} is not in the architecture")
        else:
            capacity = capacities[bus.id]
            if load[bus.id] > capacity:
                reasons.append(
                    f"bus {bus.id} overloaded: load {render_number(load[bus.id])} bit/s "
                    f"exceeds capacity {render_number(capacity)} bit/s"
                )
            elif utilization[bus.id] > warn_utilization:
                warn_reasons.append(
                    f"bus {bus.id} utilization {render_number(utilization[bus.id])} "
                    f"above {render_number(warn_utilization)}"
                )
            period = 1.0 / convert(interface.rate, HERTZ).value
            latency = interface.payload_bits / capacity + latencies[bus.id]
            freshness_s = convert(interface.freshness, SECOND).value
            if period + latency > freshness_s:
                reasons.append(
                    f"period {render_number(period)} s + latency {render_number(latency)} s "
                    f"exceeds freshness {render_number(freshness_s)} s"
                )
            service_tag = None
            service = arch.service(interface.provider_service)
            if service is not None and service.placement:
                service_tag = service.placement
            if (
                bus.placement is not None
                and service_tag is not None
                and bus.placement != service_tag
            ):
                reasons.append(
                    f"service placement {service_tag!r} does not match "
                    f"bus placement {bus.placement!r}"
                )
        if reasons:
            reason = "; ".join(reasons)
            verdicts.append(InterfaceVerdict(interface.id, Verdict.FAIL, reason))
            non_viable.append((interface.pi, reason))
            updated.append(replace(interface, status=InterfaceStatus.NON_VIABLE))
        elif warn_reasons:
            verdicts.append(
                InterfaceVerdict(interface.id, Verdict.WARN, "; ".join(warn_reasons))
            )
            updated.append(replace(interface, status=InterfaceStatus.INTEGRATED))
        else:
            verdicts.append(InterfaceVerdict(interface.id, Verdict.OK, ""))
            updated.append(replace(interface, status=InterfaceStatus.INTEGRATED))

    return FeasibilityReport(
        loads=tuple(sorted(load.items())),
        utilization=tuple(sorted(utilization.items())),
        verdicts=tuple(verdicts),
        non_viable=tuple(sorted(non_viable)),
        interfaces=tuple(updated),
    )


@dataclass(frozen=True)
class QvField:
    pi: str
    encoding: Encoding
    unit_text: str
    lo: float
    hi: float
    traces: tuple[str, ...]
    width: int


@dataclass(frozen=True)
class QualityVectorSpec:
    service: str
    fields: tuple[QvField, ...]  # lexicographic by PI id
    total_payload_bits: int  # one shared header + member widths
    rate: Quantity  # max member rate


def assemble_quality_vectors(
    interfaces: Sequence[PiInterface],
    consolidated: Sequence[PerformanceIndicator],
) -> list[QualityVectorSpec]:
    """Group integrated interfaces into one message per providing service."""

    by_pi = {p.id: p for p in consolidated}
    grouped: dict[str, list[PiInterface]] = {}
    for interface in interfaces:
        if interface.status is InterfaceStatus.INTEGRATED:
            grouped.setdefault(interface.provider_service, []).append(interface)

    out: list[QualityVectorSpec] = []
    for service_id in sorted(grouped):
        members = sorted(grouped[service_id], key=lambda i: i.pi)
        fields: list[QvField] = []
        for interface in members:
            pi = by_pi[interface.pi]
            unit = canonical_unit(pi.unit)
            rng = pi.range.converted(unit)
            fields.append(
                QvField(
                    pi=pi.id,
                    encoding=interface.encoding,
                    unit_text=render_unit(unit),
                    lo=rng.lo.value,
                    hi=rng.hi.value,
                    traces=tuple(sorted(pi.traces)),
                    width=ENCODING_WIDTH[interface.encoding],
                )
            )
        out.append(
            QualityVectorSpec(
                service=service_id,
                fields=tuple(fields),
                total_payload_bits=HEADER_BITS + sum(f.width for f in fields),
                rate=Quantity(max(i.rate.value for i in members), HERTZ),
            )
        )
    return out


def _uncertainty_text(pi: PerformanceIndicator) -> str:
    unc = pi.uncertainty
    if unc.kind is UncertaintyKind.NONE_DECLARED:
        return "none_declared"
    if unc.kind is UncertaintyKind.QUALITATIVE:
        return f"qualitative: {unc.note}"
    return f"{unc.kind.value} {render_number(unc.magnitude or 0.0)}"


def emit_icd(
    bundle: ItemBundle,
    consolidated: Sequence[PerformanceIndicator],
    interfaces: Sequence[PiInterface],
    graph: TraceGraph,
    expected_digest: Optional[str] = None,
) -> str:
    """Interface Control Document: byte-stable plain text, LF endings.

    Only integrated interfaces appear; the header pins the bundle digest
    so the document can never silently outlive the log it was cut from.
    """

    digest = snapshot_hash(bundle)
    if expected_digest is not None and expected_digest != digest:
        raise DigestMismatch(
            f"bundle digest is {digest[:12]}..., expected {expected_digest[:12]}..."
        )
    integrated = sorted(
        (i for i in interfaces if i.status is InterfaceStatus.INTEGRATED),
        key=lambda i: i.id,
    )
    by_pi = {p.id: p for p in consolidated}
    lines = [
        "ICD v1",
        f"bundle: {digest}",
        f"interfaces: {len(integrated)}",
    ]
    for interface in integrated:
        pi = by_pi[interface.pi]
        unit = canonical_unit(pi.unit)
        rng = pi.range.converted(unit)
        lines.append("")
        lines.append(f"## {interface.id}")
        lines.append(f"pi: {pi.id}")
        lines.append(f"description: {pi.description}")
        lines.append(f"provider service: {interface.provider_service}")
        lines.append(f"provider function: {pi.provider}")
        lines.append(f"bus: {interface.bus}")
        lines.append(f"encoding: {interface.encoding.value}")
        lines.append(f"unit: {render_unit(unit)}")
        lines.append(
            f"range: [{render_number(rng.lo.value)}, {render_number(rng.hi.value)}] "
            f"{render_unit(unit)}"
        )
        lines.append(f"rate: {render_number(interface.rate.value)} Hz")
        lines.append(f"payload_bits: {interface.payload_bits}")
        lines.append(f"freshness: {render_number(interface.freshness.value)} s")
        lines.append(f"uncertainty: {_uncertainty_text(pi)}")
        for trace in sorted(pi.traces):
            kind = graph.node_kind(trace)
            kind_text = kind.value if kind is not None else "unknown"
            lines.append(f"trace: {trace} [{kind_text}]")
        proposers = ", ".join(
            f'{a.role.value} "{a.name}"' for a in pi.proposed_by
        )
        lines.append(f"origin: {pi.perspective.value}, proposed by {proposers}")
    return "\n".join(lines) + "\n"


def emit_idl(quality_vectors: Sequence[QualityVectorSpec]) -> str:
    """Neutral message schema, one message block per service."""

    blocks: list[str] = []
    for qv in sorted(quality_vectors, key=lambda q: q.service):
        lines = [f"message {qv.service}QualityVector {{"]
        for f in qv.fields:
            name = f.pi.replace(".", "_")
            rng = f"[{render_number(f.lo)},{render_number(f.hi)}]"
            traces = ",".join(f.traces)
            lines.append(
                f"  {name}: {f.encoding.value} // unit={f.unit_text} range={rng} trace={traces}"
            )
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


@dataclass(frozen=True)
class NonviableEntry:
    pi: str
    reason: str
    affected: tuple[str, ...]  # requirement / failure-mode ids losing observation
    warning: str = ""


def nonviable_report(
    report: FeasibilityReport, graph: TraceGraph
) -> list[NonviableEntry]:
    """The information loss behind each non-viable PI."""

    from .graph import EdgeKind

    observes: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.OBSERVES:
            observes.setdefault(edge.src, []).append(edge.dst)

    out: list[NonviableEntry] = []
    for pi_id, reason in report.non_viable:
        affected = tuple(sorted(observes.get(pi_id, ())))
        warning = ""
        if not affected:
            warning = "PI traces to nothing; the information loss cannot be attributed"
        out.append(
            NonviableEntry(pi=pi_id, reason=reason, affected=affected, warning=warning)
        )
    return out
