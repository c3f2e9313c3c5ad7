"""Typed traceability multigraph over every artifact in a project.

Nodes are (id, kind); edges are typed and may carry a note.  The legality
table below is the single authority on which (kind, from, to) triples may
exist, and build rejects anything outside it, so queries can trust shape.
Edges point from an artifact to what it derives from; impact queries walk
them in reverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .errors import IllegalEdgeKind, UnknownNode, UnresolvedReference
from .model import (
    Attribution,
    ItemBundle,
    PerformanceIndicator,
    Perspective,
)

if TYPE_CHECKING:
    from .synth import PiInterface


class NodeKind(str, Enum):
    SCENARIO = "scenario"
    HAZARD = "hazard"
    REQUIREMENT = "requirement"
    FAILURE_MODE = "failure_mode"
    FUNCTION = "function"
    SERVICE = "service"
    BUS = "bus"
    PI = "pi"
    INTERFACE = "interface"


class EdgeKind(str, Enum):
    DERIVES_FROM = "derives_from"
    MITIGATES = "mitigates"
    OBSERVES = "observes"
    PROXIES = "proxies"
    PROVIDED_BY = "provided_by"
    HOSTED_ON = "hosted_on"
    TRANSPORTED_ON = "transported_on"
    REFINES = "refines"
    PROPOSED_BY_ROLE = "proposed_by_role"


LEGALITY: frozenset[tuple[EdgeKind, NodeKind, NodeKind]] = frozenset(
    {
        (EdgeKind.DERIVES_FROM, NodeKind.REQUIREMENT, NodeKind.SCENARIO),
        (EdgeKind.DERIVES_FROM, NodeKind.INTERFACE, NodeKind.PI),
        (EdgeKind.DERIVES_FROM, NodeKind.FAILURE_MODE, NodeKind.FUNCTION),
        (EdgeKind.MITIGATES, NodeKind.REQUIREMENT, NodeKind.HAZARD),
        (EdgeKind.OBSERVES, NodeKind.PI, NodeKind.REQUIREMENT),
        (EdgeKind.OBSERVES, NodeKind.PI, NodeKind.FAILURE_MODE),
        (EdgeKind.PROXIES, NodeKind.PI, NodeKind.REQUIREMENT),
        (EdgeKind.PROXIES, NodeKind.PI, NodeKind.FAILURE_MODE),
        (EdgeKind.PROVIDED_BY, NodeKind.PI, NodeKind.FUNCTION),
        (EdgeKind.PROPOSED_BY_ROLE, NodeKind.PI, NodeKind.FUNCTION),
        (EdgeKind.HOSTED_ON, NodeKind.FUNCTION, NodeKind.SERVICE),
        (EdgeKind.TRANSPORTED_ON, NodeKind.INTERFACE, NodeKind.BUS),
        (EdgeKind.TRANSPORTED_ON, NodeKind.SERVICE, NodeKind.BUS),
        (EdgeKind.REFINES, NodeKind.REQUIREMENT, NodeKind.REQUIREMENT),
    }
)

# Edge kinds a trace-origin walk may follow (pi -> ... -> scenario/hazard).
_ORIGIN_KINDS = (
    EdgeKind.OBSERVES,
    EdgeKind.REFINES,
    EdgeKind.DERIVES_FROM,
    EdgeKind.MITIGATES,
)


@dataclass(frozen=True)
class TraceNode:
    id: str
    kind: NodeKind


@dataclass(frozen=True)
class TraceEdge:
    src: str
    kind: EdgeKind
    dst: str
    note: str = ""


@dataclass(frozen=True)
class TraceGraph:
    """Immutable after build; queries are pure."""

    nodes: tuple[TraceNode, ...]
    edges: tuple[TraceEdge, ...]
    pis: tuple[PerformanceIndicator, ...] = ()
    monitored: frozenset[str] = frozenset()

    def node_kind(self, node_id: str) -> Optional[NodeKind]:
        for node in self.nodes:
            if node.id == node_id:
                return node.kind
        return None

    def pi(self, pi_id: str) -> Optional[PerformanceIndicator]:
        for pi in self.pis:
            if pi.id == pi_id:
                return pi
        return None


def hazard_node_id(requirement_id: str) -> str:
    return f"{requirement_id}.hazard"


class _Builder:
    def __init__(self) -> None:
        self.kinds: dict[str, NodeKind] = {}
        self.edges: list[TraceEdge] = []

    def node(self, node_id: str, kind: NodeKind) -> None:
        existing = self.kinds.get(node_id)
        if existing is not None and existing is not kind:
            raise UnresolvedReference(
                f"id {node_id!r} is used for both a {existing.value} and a {kind.value}; "
                "graph node ids must be unique"
            )
        self.kinds[node_id] = kind

    def edge(self, src: str, kind: EdgeKind, dst: str, note: str = "") -> None:
        src_kind = self.kinds.get(src)
        dst_kind = self.kinds.get(dst)
        if src_kind is None:
            raise UnresolvedReference(f"edge source {src!r} is not a known node")
        if dst_kind is None:
            raise UnresolvedReference(f"edge target {dst!r} is not a known node")
        if (kind, src_kind, dst_kind) not in LEGALITY:
            raise IllegalEdgeKind(
                f"{kind.value} edge from {src_kind.value} to {dst_kind.value} is not legal"
            )
        self.edges.append(TraceEdge(src=src, kind=kind, dst=dst, note=note))


def _check_refines_forest(edges: Iterable[TraceEdge]) -> None:
    parent: dict[str, str] = {}
    for edge in edges:
        if edge.kind is EdgeKind.REFINES:
            parent[edge.src] = edge.dst
    for start in parent:
        seen = {start}
        cursor = parent.get(start)
        while cursor is not None:
            if cursor in seen:
                raise IllegalEdgeKind(
                    f"requirement refinement around {start!r} forms a cycle"
                )
            seen.add(cursor)
            cursor = parent.get(cursor)


def build_graph(
    bundle: ItemBundle,
    consolidated: Sequence[PerformanceIndicator],
    interfaces: Sequence["PiInterface"] = (),
) -> TraceGraph:
    """Every entity becomes a node, every declared reference a typed edge."""

    b = _Builder()

    for scenario in bundle.item.scenarios:
        b.node(scenario.id, NodeKind.SCENARIO)
    for req in bundle.requirements:
        b.node(req.id, NodeKind.REQUIREMENT)
        if req.hazard is not None:
            b.node(hazard_node_id(req.id), NodeKind.HAZARD)
    for fm in bundle.failure_modes:
        b.node(fm.id, NodeKind.FAILURE_MODE)
    for service in bundle.architecture.services:
        b.node(service.id, NodeKind.SERVICE)
        for fn in service.functions:
            b.node(fn, NodeKind.FUNCTION)
    for bus in bundle.architecture.buses:
        b.node(bus.id, NodeKind.BUS)
    for pi in consolidated:
        b.node(pi.id, NodeKind.PI)
    for interface in interfaces:
        b.node(interface.id, NodeKind.INTERFACE)

    for req in bundle.requirements:
        b.edge(req.id, EdgeKind.DERIVES_FROM, req.scenario)
        if req.hazard is not None:
            b.edge(req.id, EdgeKind.MITIGATES, hazard_node_id(req.id), note=req.hazard)
        if req.parent is not None:
            b.edge(req.id, EdgeKind.REFINES, req.parent)
    for fm in bundle.failure_modes:
        b.edge(fm.id, EdgeKind.DERIVES_FROM, fm.function, note=fm.mechanism)
    for service in bundle.architecture.services:
        for fn in service.functions:
            b.edge(fn, EdgeKind.HOSTED_ON, service.id)
        for bus_id in bundle.architecture.buses_of(service.id):
            b.edge(service.id, EdgeKind.TRANSPORTED_ON, bus_id)
    for pi in consolidated:
        for trace in sorted(pi.traces):
            b.edge(pi.id, EdgeKind.OBSERVES, trace)
            if pi.proxy_for is not None:
                b.edge(pi.id, EdgeKind.PROXIES, trace, note=pi.proxy_for)
        b.edge(pi.id, EdgeKind.PROVIDED_BY, pi.provider)
        for attribution in pi.proposed_by:
            b.edge(
                pi.id,
                EdgeKind.PROPOSED_BY_ROLE,
                pi.provider,
                note=f"{attribution.role.value}:{attribution.name}",
            )
    for interface in interfaces:
        b.edge(interface.id, EdgeKind.DERIVES_FROM, interface.pi)
        b.edge(interface.id, EdgeKind.TRANSPORTED_ON, interface.bus)

    _check_refines_forest(b.edges)

    nodes = tuple(
        TraceNode(id=i, kind=k) for i, k in sorted(b.kinds.items(), key=lambda kv: (kv[0], kv[1].value))
    )
    edges = tuple(sorted(b.edges, key=lambda e: (e.src, e.kind.value, e.dst, e.note)))
    monitored = frozenset(r.id for r in bundle.requirements if r.needs_runtime_monitoring)
    return TraceGraph(
        nodes=nodes,
        edges=edges,
        pis=tuple(sorted(consolidated, key=lambda p: p.id)),
        monitored=monitored,
    )


@dataclass(frozen=True)
class TraceOrigin:
    pi: str
    perspective: Perspective
    proposed_by: tuple[Attribution, ...]
    paths: tuple[tuple[str, ...], ...]


def trace_origin(graph: TraceGraph, pi_id: str) -> TraceOrigin:
    """Maximal simple paths from the PI toward scenarios and hazards."""

    record = graph.pi(pi_id)
    if record is None or graph.node_kind(pi_id) is not NodeKind.PI:
        raise UnknownNode(f"no PI node {pi_id!r} in the graph")

    forward: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind in _ORIGIN_KINDS:
            forward.setdefault(edge.src, []).append(edge.dst)
    for targets in forward.values():
        targets.sort()

    paths: list[tuple[str, ...]] = []

    def walk(path: list[str]) -> None:
        tip = path[-1]
        extended = False
        for nxt in forward.get(tip, ()):  # sorted -> deterministic
            if nxt in path:
                continue
            extended = True
            walk(path + [nxt])
        if not extended and len(path) > 1:
            paths.append(tuple(path))

    walk([pi_id])
    return TraceOrigin(
        pi=pi_id,
        perspective=record.perspective,
        proposed_by=record.proposed_by,
        paths=tuple(sorted(paths)),
    )


@dataclass(frozen=True)
class CoverageReport:
    orphan_pis: tuple[str, ...]
    unmonitored_requirements: tuple[str, ...]
    unobserved_failure_modes: tuple[str, ...]

    @property
    def clean(self) -> bool:
        return not (
            self.orphan_pis or self.unmonitored_requirements or self.unobserved_failure_modes
        )


def coverage_report(graph: TraceGraph) -> CoverageReport:
    """Both perspectives must land in the log and stay linked.

    A monitored requirement counts as covered when it or any requirement
    refining it (transitively) has an incoming observes edge.
    """

    observed: set[str] = set()
    observing: dict[str, int] = {}
    children: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.OBSERVES:
            observed.add(edge.dst)
            observing[edge.src] = observing.get(edge.src, 0) + 1
        elif edge.kind is EdgeKind.REFINES:
            children.setdefault(edge.dst, []).append(edge.src)

    orphans = tuple(
        sorted(n.id for n in graph.nodes if n.kind is NodeKind.PI and n.id not in observing)
    )

    def covered(req_id: str, seen: set[str]) -> bool:
        if req_id in observed:
            return True
        seen.add(req_id)
        return any(
            covered(child, seen) for child in children.get(req_id, ()) if child not in seen
        )

    unmonitored = tuple(
        sorted(r for r in graph.monitored if not covered(r, set()))
    )
    unobserved = tuple(
        sorted(
            n.id
            for n in graph.nodes
            if n.kind is NodeKind.FAILURE_MODE and n.id not in observed
        )
    )
    return CoverageReport(
        orphan_pis=orphans,
        unmonitored_requirements=unmonitored,
        unobserved_failure_modes=unobserved,
    )


def impact(graph: TraceGraph, node_id: str) -> tuple[str, ...]:
    """Everything that builds on the node: reverse reachability, sorted."""

    if graph.node_kind(node_id) is None:
        raise UnknownNode(f"no node {node_id!r} in the graph")
    reverse: dict[str, list[str]] = {}
    for edge in graph.edges:
        reverse.setdefault(edge.dst, []).append(edge.src)
    seen: set[str] = set()
    stack = [node_id]
    while stack:
        cursor = stack.pop()
        for src in reverse.get(cursor, ()):
            if src not in seen:
                seen.add(src)
                stack.append(src)
    seen.discard(node_id)
    return tuple(sorted(seen))


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def nodes_tsv(graph: TraceGraph) -> str:
    lines = [f"{n.id}\t{n.kind.value}" for n in graph.nodes]
    return "\n".join(lines) + ("\n" if lines else "")


def edges_tsv(graph: TraceGraph) -> str:
    lines = [
        f"{e.src}\t{e.kind.value}\t{e.dst}\t{_clean(e.note)}" for e in graph.edges
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def graph_document(graph: TraceGraph) -> dict:
    """Structured form for the workbench API; ordering matches the TSVs."""

    return {
        "nodes": [{"id": n.id, "kind": n.kind.value} for n in graph.nodes],
        "edges": [
            {"from": e.src, "kind": e.kind.value, "to": e.dst, "note": e.note}
            for e in graph.edges
        ],
    }
