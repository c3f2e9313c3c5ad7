"""Canonical text form and content hashing for item bundles.

Every decision in the toolchain is anchored to the snapshot digest of the
bundle it was made against, so the text form must be byte-stable: fixed
category order, blocks sorted by id, fixed field order inside each block,
quantities normalized to coherent units, floats rendered via repr.
"""

from __future__ import annotations

import hashlib
from dataclasses import replace

from .model import (
    ArchitectureModel,
    Attribution,
    Bus,
    FailureMode,
    ItemBundle,
    ItemDefinition,
    PerformanceIndicator,
    SafetyRequirement,
    Scenario,
    Service,
    UncertaintyKind,
    ValueRange,
)
from .units import Quantity, canonical_unit, convert, render_unit

HEADER = "# pid-canonical v1"


def render_number(value: float) -> str:
    return repr(float(value))


def render_string(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise ValueError("strings must not contain literal newlines")
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render_quantity(q: Quantity) -> str:
    return f"{render_number(q.value)} {render_unit(q.unit)}"


def render_range(r: ValueRange) -> str:
    lo = render_number(r.lo.value)
    hi = render_number(r.hi.value)
    return f"[{lo}, {hi}] {render_unit(r.unit)}"


def render_attribution(a: Attribution) -> str:
    return f"{a.role.value} {render_string(a.name)}"


def _norm_quantity(q: Quantity) -> Quantity:
    return convert(q, canonical_unit(q.unit))


def _norm_pi(pi: PerformanceIndicator) -> PerformanceIndicator:
    unit = canonical_unit(pi.unit)
    return replace(
        pi,
        unit=unit,
        range=pi.range.converted(unit),
        rate=_norm_quantity(pi.rate),
        payload=_norm_quantity(pi.payload),
        freshness=_norm_quantity(pi.freshness),
        proposed_by=tuple(sorted(set(pi.proposed_by), key=Attribution.sort_key)),
    )


def canonicalize_bundle(bundle: ItemBundle) -> ItemBundle:
    """Sort every collection and normalize every quantity."""

    item = ItemDefinition(
        name=bundle.item.name,
        use_cases=tuple(sorted(bundle.item.use_cases)),
        scenarios=tuple(sorted(bundle.item.scenarios, key=lambda s: s.id)),
    )
    arch = ArchitectureModel(
        services=tuple(
            replace(s, functions=tuple(sorted(s.functions)))
            for s in sorted(bundle.architecture.services, key=lambda s: s.id)
        ),
        buses=tuple(
            replace(
                b,
                capacity=_norm_quantity(b.capacity),
                base_latency=_norm_quantity(b.base_latency),
            )
            for b in sorted(bundle.architecture.buses, key=lambda b: b.id)
        ),
        attachments={
            sid: tuple(sorted(buses))
            for sid, buses in sorted(bundle.architecture.attachments.items())
        },
    )
    return ItemBundle(
        item=item,
        architecture=arch,
        requirements=tuple(sorted(bundle.requirements, key=lambda r: r.id)),
        failure_modes=tuple(sorted(bundle.failure_modes, key=lambda f: f.id)),
        proposals=tuple(
            _norm_pi(p) for p in sorted(bundle.proposals, key=lambda p: p.id)
        ),
    )


def _item_lines(item: ItemDefinition) -> list[str]:
    lines = ["item {"]
    lines.append(f"  name: {render_string(item.name)}")
    if item.use_cases:
        rendered = ", ".join(render_string(u) for u in item.use_cases)
        lines.append(f"  use_cases: {rendered}")
    lines.append("}")
    return lines


def _scenario_lines(sc: Scenario) -> list[str]:
    return [
        f'scenario {render_string(sc.id)} {{',
        f"  description: {render_string(sc.description)}",
        "}",
    ]


def _service_lines(service: Service, arch: ArchitectureModel) -> list[str]:
    lines = [f'service {render_string(service.id)} {{']
    lines.append(f"  functions: {', '.join(service.functions)}")
    if service.placement:
        lines.append(f"  placement: {render_string(service.placement)}")
    buses = arch.buses_of(service.id)
    if buses:
        lines.append(f"  buses: {', '.join(buses)}")
    lines.append("}")
    return lines


def _bus_lines(bus: Bus) -> list[str]:
    lines = [f'bus {render_string(bus.id)} {{']
    lines.append(f"  capacity: {render_quantity(bus.capacity)}")
    lines.append(f"  base_latency: {render_quantity(bus.base_latency)}")
    if bus.placement is not None:
        lines.append(f"  placement: {render_string(bus.placement)}")
    lines.append("}")
    return lines


def _requirement_lines(req: SafetyRequirement) -> list[str]:
    lines = [f'requirement {render_string(req.id)} {{']
    lines.append(f"  statement: {render_string(req.statement)}")
    lines.append(f"  scenario: {render_string(req.scenario)}")
    if req.hazard is not None:
        lines.append(f"  hazard: {render_string(req.hazard)}")
    if req.parent is not None:
        lines.append(f"  parent: {render_string(req.parent)}")
    if req.needs_runtime_monitoring:
        lines.append("  monitored: true")
    lines.append("}")
    return lines


def _failure_mode_lines(fm: FailureMode) -> list[str]:
    return [
        f'failure_mode {render_string(fm.id)} {{',
        f"  function: {fm.function}",
        f"  mechanism: {render_string(fm.mechanism)}",
        f"  effect: {fm.effect.value}",
        f"  method: {fm.method.value}",
        "}",
    ]


def _pi_lines(pi: PerformanceIndicator) -> list[str]:
    lines = [f'pi {render_string(pi.id)} {{']
    lines.append(f"  description: {render_string(pi.description)}")
    lines.append(f"  unit: {render_unit(pi.unit)}")
    lines.append(f"  range: {render_range(pi.range)}")
    lines.append(f"  perspective: {pi.perspective.value}")
    rendered = ", ".join(render_attribution(a) for a in pi.proposed_by)
    lines.append(f"  proposed_by: {rendered}")
    lines.append(f"  provider: {pi.provider}")
    lines.append(f"  rate: {render_quantity(pi.rate)}")
    lines.append(f"  payload: {render_quantity(pi.payload)}")
    lines.append(f"  freshness: {render_quantity(pi.freshness)}")
    unc = pi.uncertainty
    if unc.kind is not UncertaintyKind.NONE_DECLARED:
        if unc.kind is UncertaintyKind.QUALITATIVE:
            lines.append(f"  uncertainty: qualitative {render_string(unc.note or '')}")
        else:
            lines.append(
                f"  uncertainty: {unc.kind.value} {render_number(unc.magnitude or 0.0)}"
            )
    if pi.traces:
        rendered = ", ".join(render_string(t) for t in sorted(pi.traces))
        lines.append(f"  traces: {rendered}")
    if pi.proxy_for is not None:
        lines.append(f"  proxy_for: {render_string(pi.proxy_for)}")
    if pi.integral:
        lines.append("  values: integer")
    if pi.merged_from:
        rendered = ", ".join(render_string(m) for m in sorted(pi.merged_from))
        lines.append(f"  merged_from: {rendered}")
    lines.append("}")
    return lines


def serialize_bundle(bundle: ItemBundle) -> str:
    """Canonical text; parse of the output rebuilds an equal bundle."""

    b = canonicalize_bundle(bundle)
    blocks: list[list[str]] = []
    if not b.item.is_empty:
        blocks.append(_item_lines(b.item))
    blocks.extend(_scenario_lines(sc) for sc in b.item.scenarios)
    blocks.extend(_service_lines(s, b.architecture) for s in b.architecture.services)
    blocks.extend(_bus_lines(bus) for bus in b.architecture.buses)
    blocks.extend(_requirement_lines(r) for r in b.requirements)
    blocks.extend(_failure_mode_lines(f) for f in b.failure_modes)
    blocks.extend(_pi_lines(p) for p in b.proposals)

    parts = [HEADER]
    for block in blocks:
        parts.append("")
        parts.extend(block)
    return "\n".join(parts) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def snapshot_hash(bundle: ItemBundle) -> str:
    """Content digest of the canonical text, 64 lowercase hex chars."""
    return sha256_hex(serialize_bundle(bundle))
