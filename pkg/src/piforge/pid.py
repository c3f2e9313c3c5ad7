"""Line-oriented parser for the PI definition text format.

One entity block per `kind "id" { ... }` section, one `field: value` pair
per line, `#` starts a comment outside strings.  The parser recovers from
malformed lines (diagnostic, keep going), resolves references across all
source files, and runs the per-PI completeness check so callers get one
diagnostic stream with source spans.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

from .diagnostics import Diagnostic, Severity, SourceSpan, has_errors
from .errors import MalformedUnitExpression, UnknownUnitToken
from .model import (
    AnalysisMethod,
    ArchitectureModel,
    Attribution,
    Bus,
    Effect,
    FailureMode,
    ItemBundle,
    ItemDefinition,
    Perspective,
    PerformanceIndicator,
    Role,
    SafetyRequirement,
    Scenario,
    Service,
    UncertaintyKind,
    UncertaintySpec,
    ValueRange,
    validate_pi,
)
from .units import DIMENSIONLESS, Quantity, UnitVector, parse_unit

_HEADER_RE = re.compile(r'^(?P<kind>[a-z_]+)(?:\s+(?P<id>"(?:[^"\\]|\\.)*"))?\s*\{\s*$')
_FIELD_RE = re.compile(r"^(?P<name>[a-z_]+)\s*:\s*(?P<rest>.*)$")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")

BLOCK_KINDS = (
    "item",
    "scenario",
    "service",
    "bus",
    "requirement",
    "failure_mode",
    "pi",
)


class _ValueError_(Exception):
    """Internal: a field value failed to parse; offset is relative to the value."""

    def __init__(self, message: str, offset: int = 0) -> None:
        super().__init__(message)
        self.offset = offset


@dataclass
class ParseResult:
    bundle: ItemBundle
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)


def _strip_comment(line: str) -> str:
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "#":
            return line[:i]
        i += 1
    return line


class _Scanner:
    """Cursor over one field-value fragment; offsets feed span columns."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise _ValueError_(f"expected {ch!r}", self.pos)
        self.pos += 1

    def rest(self) -> str:
        self.skip_ws()
        out = self.text[self.pos :]
        self.pos = len(self.text)
        return out.strip()

    def read_string(self) -> str:
        self.skip_ws()
        start = self.pos
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            raise _ValueError_("expected a quoted string", self.pos)
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise _ValueError_("dangling escape", self.pos)
                nxt = self.text[self.pos + 1]
                if nxt not in ('"', "\\"):
                    raise _ValueError_(f"unknown escape \\{nxt}", self.pos)
                out.append(nxt)
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise _ValueError_("unterminated string", start)

    def read_name(self) -> str:
        self.skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise _ValueError_("expected a name", self.pos)
        self.pos = m.end()
        return m.group(0)

    def read_number(self) -> float:
        self.skip_ws()
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            raise _ValueError_("expected a number", self.pos)
        self.pos = m.end()
        return float(m.group(0))

    def read_unit_to_end(self) -> UnitVector:
        text = self.rest()
        if not text:
            return DIMENSIONLESS
        try:
            return parse_unit(text)
        except (UnknownUnitToken, MalformedUnitExpression) as exc:
            raise _ValueError_(str(exc)) from exc

    def expect_end(self) -> None:
        if not self.at_end():
            raise _ValueError_("trailing content after value", self.pos)


def _unescape_id(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


# Field value parsers ----------------------------------------------------

def _v_string(sc: _Scanner):
    out = sc.read_string()
    sc.expect_end()
    return out


def _v_name(sc: _Scanner):
    out = sc.read_name()
    sc.expect_end()
    return out


def _v_bool(sc: _Scanner):
    word = sc.read_name()
    sc.expect_end()
    if word == "true":
        return True
    if word == "false":
        return False
    raise _ValueError_(f"expected true or false, got {word!r}")


def _v_quantity(sc: _Scanner):
    value = sc.read_number()
    unit = sc.read_unit_to_end()
    return Quantity(value, unit)


def _v_unit(sc: _Scanner):
    text = sc.rest()
    if not text:
        raise _ValueError_("expected a unit expression")
    try:
        return parse_unit(text)
    except (UnknownUnitToken, MalformedUnitExpression) as exc:
        raise _ValueError_(str(exc)) from exc


def _v_range(sc: _Scanner):
    sc.expect("[")
    lo = sc.read_number()
    sc.expect(",")
    hi = sc.read_number()
    sc.expect("]")
    unit = sc.read_unit_to_end()
    return ValueRange(Quantity(lo, unit), Quantity(hi, unit))


def _enum_value(sc: _Scanner, enum_cls, label: str):
    word = sc.read_name()
    try:
        return enum_cls(word)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise _ValueError_(f"unknown {label} {word!r}; one of: {allowed}") from None


def _v_perspective(sc: _Scanner):
    out = _enum_value(sc, Perspective, "perspective")
    sc.expect_end()
    return out


def _v_effect(sc: _Scanner):
    out = _enum_value(sc, Effect, "effect")
    sc.expect_end()
    return out


def _v_method(sc: _Scanner):
    out = _enum_value(sc, AnalysisMethod, "analysis method")
    sc.expect_end()
    return out


def _v_attribution_list(sc: _Scanner):
    out: list[Attribution] = []
    while True:
        role = _enum_value(sc, Role, "role")
        name = sc.read_string()
        out.append(Attribution(role, name))
        if sc.peek() != ",":
            break
        sc.expect(",")
    sc.expect_end()
    return tuple(out)


def _v_string_list(sc: _Scanner):
    out: list[str] = []
    while True:
        out.append(sc.read_string())
        if sc.peek() != ",":
            break
        sc.expect(",")
    sc.expect_end()
    return tuple(out)


def _v_name_list(sc: _Scanner):
    out: list[str] = []
    while True:
        out.append(sc.read_name())
        if sc.peek() != ",":
            break
        sc.expect(",")
    sc.expect_end()
    return tuple(out)


def _v_uncertainty(sc: _Scanner):
    kind = _enum_value(sc, UncertaintyKind, "uncertainty kind")
    if kind is UncertaintyKind.NONE_DECLARED:
        sc.expect_end()
        return UncertaintySpec()
    if kind is UncertaintyKind.QUALITATIVE:
        note = sc.read_string()
        sc.expect_end()
        return UncertaintySpec(kind=kind, note=note)
    magnitude = sc.read_number()
    sc.expect_end()
    if magnitude < 0:
        raise _ValueError_("uncertainty magnitude must be >= 0")
    return UncertaintySpec(kind=kind, magnitude=magnitude)


def _v_values(sc: _Scanner):
    word = sc.read_name()
    sc.expect_end()
    if word == "integer":
        return True
    if word == "real":
        return False
    raise _ValueError_(f"expected integer or real, got {word!r}")


@dataclass(frozen=True)
class _FieldSpec:
    parser: Callable[[_Scanner], object]
    required: bool = False


_SCHEMAS: dict[str, dict[str, _FieldSpec]] = {
    "item": {
        "name": _FieldSpec(_v_string, required=True),
        "use_cases": _FieldSpec(_v_string_list),
    },
    "scenario": {
        "description": _FieldSpec(_v_string, required=True),
    },
    "service": {
        "functions": _FieldSpec(_v_name_list, required=True),
        "placement": _FieldSpec(_v_string),
        "buses": _FieldSpec(_v_name_list),
    },
    "bus": {
        "capacity": _FieldSpec(_v_quantity, required=True),
        "base_latency": _FieldSpec(_v_quantity, required=True),
        "placement": _FieldSpec(_v_string),
    },
    "requirement": {
        "statement": _FieldSpec(_v_string, required=True),
        "scenario": _FieldSpec(_v_string, required=True),
        "hazard": _FieldSpec(_v_string),
        "parent": _FieldSpec(_v_string),
        "monitored": _FieldSpec(_v_bool),
    },
    "failure_mode": {
        "function": _FieldSpec(_v_name, required=True),
        "mechanism": _FieldSpec(_v_string, required=True),
        "effect": _FieldSpec(_v_effect, required=True),
        "method": _FieldSpec(_v_method, required=True),
    },
    "pi": {
        "description": _FieldSpec(_v_string, required=True),
        "unit": _FieldSpec(_v_unit, required=True),
        "range": _FieldSpec(_v_range, required=True),
        "perspective": _FieldSpec(_v_perspective, required=True),
        "proposed_by": _FieldSpec(_v_attribution_list, required=True),
        "provider": _FieldSpec(_v_name, required=True),
        "rate": _FieldSpec(_v_quantity, required=True),
        "payload": _FieldSpec(_v_quantity, required=True),
        "freshness": _FieldSpec(_v_quantity, required=True),
        "uncertainty": _FieldSpec(_v_uncertainty),
        "traces": _FieldSpec(_v_string_list),
        "proxy_for": _FieldSpec(_v_string),
        "values": _FieldSpec(_v_values),
        "merged_from": _FieldSpec(_v_string_list),
    },
}

_ID_LESS = ("item",)


@dataclass
class _Block:
    kind: str
    entity_id: str
    span: SourceSpan
    fields: dict[str, object] = field(default_factory=dict)
    field_spans: dict[str, SourceSpan] = field(default_factory=dict)


class _Parser:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []
        self.blocks: list[_Block] = []

    def error(self, span: SourceSpan, code: str, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(severity=Severity.ERROR, code=code, message=message, span=span)
        )

    def warning(self, span: SourceSpan, code: str, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(severity=Severity.WARNING, code=code, message=message, span=span)
        )

    def parse_source(self, path: str, text: str) -> None:
        if text.startswith("﻿"):
            self.error(
                SourceSpan(path, 1, 1, 1),
                "E_BOM",
                "file starts with a byte order mark; save as plain UTF-8",
            )
            text = text.lstrip("﻿")
        lines = text.split("\n")
        i = 0
        while i < len(lines):
            raw = _strip_comment(lines[i])
            stripped = raw.strip()
            line_no = i + 1
            if not stripped:
                i += 1
                continue
            m = _HEADER_RE.match(stripped)
            if not m:
                col = len(lines[i]) - len(lines[i].lstrip()) + 1
                self.error(
                    SourceSpan(path, line_no, col, len(stripped)),
                    "E_EXPECTED_BLOCK",
                    f"expected a block header, got {stripped!r}",
                )
                i = self._skip_to_next_block(lines, i + 1)
                continue
            kind = m.group("kind")
            col = len(lines[i]) - len(lines[i].lstrip()) + 1
            header_span = SourceSpan(path, line_no, col, len(stripped))
            if kind not in BLOCK_KINDS:
                self.error(
                    header_span,
                    "E_UNKNOWN_BLOCK",
                    f"unknown block kind {kind!r}",
                )
                i = self._skip_block_body(lines, i + 1)
                continue
            raw_id = m.group("id")
            if kind in _ID_LESS:
                if raw_id is not None:
                    self.error(header_span, "E_BLOCK_ID", f"{kind} block takes no id")
                entity_id = ""
            elif raw_id is None:
                self.error(header_span, "E_BLOCK_ID", f"{kind} block needs a quoted id")
                i = self._skip_block_body(lines, i + 1)
                continue
            else:
                entity_id = _unescape_id(raw_id)
            block = _Block(kind=kind, entity_id=entity_id, span=header_span)
            i = self._parse_body(path, lines, i + 1, block)
            self._finish_block(block)
        return None

    def _skip_to_next_block(self, lines: list[str], start: int) -> int:
        i = start
        while i < len(lines):
            stripped = _strip_comment(lines[i]).strip()
            if _HEADER_RE.match(stripped):
                return i
            i += 1
        return i

    def _skip_block_body(self, lines: list[str], start: int) -> int:
        i = start
        while i < len(lines):
            stripped = _strip_comment(lines[i]).strip()
            if stripped == "}":
                return i + 1
            if _HEADER_RE.match(stripped):
                return i
            i += 1
        return i

    def _parse_body(self, path: str, lines: list[str], start: int, block: _Block) -> int:
        schema = _SCHEMAS[block.kind]
        i = start
        while i < len(lines):
            raw = _strip_comment(lines[i])
            stripped = raw.strip()
            line_no = i + 1
            if not stripped:
                i += 1
                continue
            if stripped == "}":
                return i + 1
            if _HEADER_RE.match(stripped):
                self.error(block.span, "E_UNCLOSED_BLOCK", f"{block.kind} block never closed")
                return i
            m = _FIELD_RE.match(stripped)
            indent = len(raw) - len(raw.lstrip())
            if not m:
                self.error(
                    SourceSpan(path, line_no, indent + 1, len(stripped)),
                    "E_EXPECTED_FIELD",
                    f"expected 'field: value', got {stripped!r}",
                )
                i += 1
                continue
            name = m.group("name")
            value_text = m.group("rest")
            value_col = indent + 1 + (len(stripped) - len(value_text))
            span = SourceSpan(path, line_no, value_col, max(len(value_text.strip()), 1))
            spec = schema.get(name)
            if spec is None:
                self.warning(
                    SourceSpan(path, line_no, indent + 1, len(name)),
                    "W_UNKNOWN_FIELD",
                    f"unknown field {name!r} in {block.kind} block",
                )
                i += 1
                continue
            if name in block.fields:
                self.warning(span, "W_DUPLICATE_FIELD", f"field {name!r} repeated; first value kept")
                i += 1
                continue
            sc = _Scanner(value_text)
            try:
                value = spec.parser(sc)
            except _ValueError_ as exc:
                off_span = SourceSpan(path, line_no, value_col + exc.offset, 1)
                self.error(off_span, "E_FIELD_VALUE", f"{name}: {exc}")
                i += 1
                continue
            except ValueError as exc:
                self.error(span, "E_FIELD_VALUE", f"{name}: {exc}")
                i += 1
                continue
            block.fields[name] = value
            block.field_spans[name] = span
            i += 1
        self.error(block.span, "E_UNCLOSED_BLOCK", f"{block.kind} block never closed")
        return i

    def _finish_block(self, block: _Block) -> None:
        schema = _SCHEMAS[block.kind]
        missing = [n for n, spec in schema.items() if spec.required and n not in block.fields]
        if missing:
            label = f"{block.kind} {block.entity_id!r}" if block.entity_id else block.kind
            self.error(
                block.span,
                "E_MISSING_FIELD",
                f"{label} is missing required fields: {', '.join(missing)}",
            )
            return
        self.blocks.append(block)


def _build_bundle(parser: _Parser) -> ItemBundle:
    """Turn surviving blocks into a bundle; duplicate ids keep the first."""

    item_block: Optional[_Block] = None
    by_kind: dict[str, dict[str, _Block]] = {k: {} for k in BLOCK_KINDS}
    for block in parser.blocks:
        if block.kind == "item":
            if item_block is not None:
                parser.error(block.span, "E_DUPLICATE_ID", "more than one item block")
                continue
            item_block = block
            continue
        table = by_kind[block.kind]
        if block.entity_id in table:
            parser.error(
                block.span,
                "E_DUPLICATE_ID",
                f"duplicate {block.kind} id {block.entity_id!r}; first definition kept",
            )
            continue
        table[block.entity_id] = block

    scenarios = tuple(
        Scenario(id=b.entity_id, description=str(b.fields["description"]))
        for b in sorted(by_kind["scenario"].values(), key=lambda b: b.entity_id)
    )
    item = ItemDefinition(
        name=str(item_block.fields["name"]) if item_block else "",
        use_cases=tuple(sorted(item_block.fields.get("use_cases", ()))) if item_block else (),  # type: ignore[arg-type]
        scenarios=scenarios,
    )

    services: list[Service] = []
    attachments: dict[str, tuple[str, ...]] = {}
    for b in sorted(by_kind["service"].values(), key=lambda b: b.entity_id):
        functions = tuple(sorted(b.fields["functions"]))  # type: ignore[arg-type]
        services.append(
            Service(
                id=b.entity_id,
                functions=functions,
                placement=str(b.fields.get("placement", "")),
            )
        )
        buses = b.fields.get("buses")
        if buses:
            attachments[b.entity_id] = tuple(sorted(buses))  # type: ignore[arg-type]

    buses = tuple(
        Bus(
            id=b.entity_id,
            capacity=b.fields["capacity"],  # type: ignore[arg-type]
            base_latency=b.fields["base_latency"],  # type: ignore[arg-type]
            placement=b.fields.get("placement"),  # type: ignore[arg-type]
        )
        for b in sorted(by_kind["bus"].values(), key=lambda b: b.entity_id)
    )

    requirements = tuple(
        SafetyRequirement(
            id=b.entity_id,
            statement=str(b.fields["statement"]),
            scenario=str(b.fields["scenario"]),
            hazard=b.fields.get("hazard"),  # type: ignore[arg-type]
            parent=b.fields.get("parent"),  # type: ignore[arg-type]
            needs_runtime_monitoring=bool(b.fields.get("monitored", False)),
        )
        for b in sorted(by_kind["requirement"].values(), key=lambda b: b.entity_id)
    )

    failure_modes = tuple(
        FailureMode(
            id=b.entity_id,
            function=str(b.fields["function"]),
            mechanism=str(b.fields["mechanism"]),
            effect=b.fields["effect"],  # type: ignore[arg-type]
            method=b.fields["method"],  # type: ignore[arg-type]
        )
        for b in sorted(by_kind["failure_mode"].values(), key=lambda b: b.entity_id)
    )

    proposals = tuple(
        PerformanceIndicator(
            id=b.entity_id,
            description=str(b.fields["description"]),
            unit=b.fields["unit"],  # type: ignore[arg-type]
            range=b.fields["range"],  # type: ignore[arg-type]
            perspective=b.fields["perspective"],  # type: ignore[arg-type]
            proposed_by=b.fields["proposed_by"],  # type: ignore[arg-type]
            provider=str(b.fields["provider"]),
            rate=b.fields["rate"],  # type: ignore[arg-type]
            payload=b.fields["payload"],  # type: ignore[arg-type]
            freshness=b.fields["freshness"],  # type: ignore[arg-type]
            uncertainty=b.fields.get("uncertainty", UncertaintySpec()),  # type: ignore[arg-type]
            traces=frozenset(b.fields.get("traces", ())),  # type: ignore[arg-type]
            proxy_for=b.fields.get("proxy_for"),  # type: ignore[arg-type]
            integral=bool(b.fields.get("values", False)),
            merged_from=frozenset(b.fields.get("merged_from", ())),  # type: ignore[arg-type]
        )
        for b in sorted(by_kind["pi"].values(), key=lambda b: b.entity_id)
    )

    return ItemBundle(
        item=item,
        architecture=ArchitectureModel(
            services=tuple(services), buses=buses, attachments=attachments
        ),
        requirements=requirements,
        failure_modes=failure_modes,
        proposals=proposals,
    )


def _resolve(parser: _Parser, bundle: ItemBundle) -> None:
    """Reference resolution with spans taken from the defining field lines."""

    spans = {
        (b.kind, b.entity_id): b
        for b in parser.blocks
        if b.kind != "item"
    }

    def span_of(kind: str, entity_id: str, field_name: str) -> Optional[SourceSpan]:
        block = spans.get((kind, entity_id))
        if block is None:
            return None
        return block.field_spans.get(field_name, block.span)

    def err(span: Optional[SourceSpan], message: str) -> None:
        parser.diagnostics.append(
            Diagnostic(
                severity=Severity.ERROR,
                code="E_UNRESOLVED_REF",
                message=message,
                span=span,
            )
        )

    scenario_ids = {s.id for s in bundle.item.scenarios}
    bus_ids = {b.id for b in bundle.architecture.buses}
    requirement_ids = {r.id for r in bundle.requirements}
    failure_ids = {f.id for f in bundle.failure_modes}
    functions = {fn for s in bundle.architecture.services for fn in s.functions}

    overlap = requirement_ids & failure_ids
    for shared in sorted(overlap):
        parser.error(
            spans[("failure_mode", shared)].span,
            "E_DUPLICATE_ID",
            f"id {shared!r} used for both a requirement and a failure mode",
        )

    owner: dict[str, str] = {}
    for service in bundle.architecture.services:
        for fn in service.functions:
            if fn in owner:
                err(
                    span_of("service", service.id, "functions"),
                    f"function {fn!r} already belongs to service {owner[fn]!r}",
                )
            owner[fn] = service.id
        for bus_id in bundle.architecture.buses_of(service.id):
            if bus_id not in bus_ids:
                err(
                    span_of("service", service.id, "buses"),
                    f"service {service.id!r} attaches to unknown bus {bus_id!r}",
                )

    for req in bundle.requirements:
        if req.scenario not in scenario_ids:
            err(
                span_of("requirement", req.id, "scenario"),
                f"requirement {req.id!r} names unknown scenario {req.scenario!r}",
            )
        if req.parent is not None and req.parent not in requirement_ids:
            err(
                span_of("requirement", req.id, "parent"),
                f"requirement {req.id!r} names unknown parent {req.parent!r}",
            )

    for fm in bundle.failure_modes:
        if fm.function not in functions:
            err(
                span_of("failure_mode", fm.id, "function"),
                f"failure mode {fm.id!r} names unknown function {fm.function!r}",
            )

    for pi in bundle.proposals:
        if pi.provider not in functions:
            err(
                span_of("pi", pi.id, "provider"),
                f"PI {pi.id!r} provider {pi.provider!r} is not a known function",
            )
        for trace in sorted(pi.traces):
            if trace not in requirement_ids and trace not in failure_ids:
                err(
                    span_of("pi", pi.id, "traces"),
                    f"PI {pi.id!r} traces unknown artifact {trace!r}",
                )


def _validate_proposals(parser: _Parser, bundle: ItemBundle) -> None:
    blocks = {(b.kind, b.entity_id): b for b in parser.blocks}
    for pi in bundle.proposals:
        block = blocks.get(("pi", pi.id))
        for diag in validate_pi(pi):
            span = None
            if block is not None:
                span = block.field_spans.get(diag.field or "", block.span)
            parser.diagnostics.append(replace(diag, span=span))


def parse_pid(sources: Sequence[tuple[str, str]]) -> ParseResult:
    """Parse (path, text) pairs into one bundle plus a diagnostic stream.

    Sources are processed in path order so diagnostics and duplicate-id
    resolution do not depend on argument order.
    """

    parser = _Parser()
    for path, text in sorted(sources, key=lambda s: s[0]):
        parser.parse_source(path, text)
    bundle = _build_bundle(parser)
    _resolve(parser, bundle)
    _validate_proposals(parser, bundle)
    return ParseResult(bundle=bundle, diagnostics=parser.diagnostics)


def parse_pid_text(text: str, path: str = "<memory>") -> ParseResult:
    return parse_pid([(path, text)])


# Decision files ---------------------------------------------------------

class Verdict(str, Enum):
    MERGE = "merge"
    KEEP_SEPARATE = "keep_separate"


@dataclass(frozen=True)
class Decision:
    """A coordinator ruling on one merge proposal, anchored to a bundle digest."""

    id: str
    proposal: str
    verdict: Verdict
    decided_by: Attribution
    rationale: str
    bundle_digest: str


_DECISION_SCHEMA: dict[str, _FieldSpec] = {
    "proposal": _FieldSpec(_v_string, required=True),
    "verdict": _FieldSpec(lambda sc: _v_verdict(sc), required=True),
    "decided_by": _FieldSpec(lambda sc: _v_attribution(sc), required=True),
    "rationale": _FieldSpec(_v_string, required=True),
    "bundle_digest": _FieldSpec(_v_string, required=True),
}


def _v_verdict(sc: _Scanner):
    out = _enum_value(sc, Verdict, "verdict")
    sc.expect_end()
    return out


def _v_attribution(sc: _Scanner):
    role = _enum_value(sc, Role, "role")
    name = sc.read_string()
    sc.expect_end()
    return Attribution(role, name)


def parse_decisions(text: str, path: str = "<memory>") -> tuple[list[Decision], list[Diagnostic]]:
    """Parse `decision "id" { ... }` blocks; malformed blocks are skipped."""

    parser = _Parser()
    lines = text.split("\n")
    blocks: list[_Block] = []
    i = 0
    while i < len(lines):
        stripped = _strip_comment(lines[i]).strip()
        line_no = i + 1
        if not stripped:
            i += 1
            continue
        m = _HEADER_RE.match(stripped)
        if not m or m.group("kind") != "decision" or m.group("id") is None:
            parser.error(
                SourceSpan(path, line_no, 1, len(stripped)),
                "E_EXPECTED_BLOCK",
                f"expected decision block, got {stripped!r}",
            )
            i += 1
            continue
        block = _Block(
            kind="decision",
            entity_id=_unescape_id(m.group("id")),
            span=SourceSpan(path, line_no, 1, len(stripped)),
        )
        i = _parse_decision_body(parser, path, lines, i + 1, block)
        missing = [
            n for n, spec in _DECISION_SCHEMA.items() if spec.required and n not in block.fields
        ]
        if missing:
            parser.error(
                block.span,
                "E_MISSING_FIELD",
                f"decision {block.entity_id!r} is missing: {', '.join(missing)}",
            )
            continue
        digest = str(block.fields["bundle_digest"])
        if not _DIGEST_RE.match(digest):
            parser.error(
                block.field_spans.get("bundle_digest", block.span),
                "E_FIELD_VALUE",
                "bundle_digest must be 64 lowercase hex characters",
            )
            continue
        blocks.append(block)

    decisions: list[Decision] = []
    seen: set[str] = set()
    for block in blocks:
        if block.entity_id in seen:
            parser.error(
                block.span,
                "E_DUPLICATE_ID",
                f"duplicate decision id {block.entity_id!r}; first definition kept",
            )
            continue
        seen.add(block.entity_id)
        decisions.append(
            Decision(
                id=block.entity_id,
                proposal=str(block.fields["proposal"]),
                verdict=block.fields["verdict"],  # type: ignore[arg-type]
                decided_by=block.fields["decided_by"],  # type: ignore[arg-type]
                rationale=str(block.fields["rationale"]),
                bundle_digest=str(block.fields["bundle_digest"]),
            )
        )
    return decisions, parser.diagnostics


def _parse_decision_body(
    parser: _Parser, path: str, lines: list[str], start: int, block: _Block
) -> int:
    i = start
    while i < len(lines):
        raw = _strip_comment(lines[i])
        stripped = raw.strip()
        line_no = i + 1
        if not stripped:
            i += 1
            continue
        if stripped == "}":
            return i + 1
        m = _FIELD_RE.match(stripped)
        indent = len(raw) - len(raw.lstrip())
        if not m:
            parser.error(
                SourceSpan(path, line_no, indent + 1, len(stripped)),
                "E_EXPECTED_FIELD",
                f"expected 'field: value', got {stripped!r}",
            )
            i += 1
            continue
        name = m.group("name")
        value_text = m.group("rest")
        value_col = indent + 1 + (len(stripped) - len(value_text))
        span = SourceSpan(path, line_no, value_col, max(len(value_text.strip()), 1))
        spec = _DECISION_SCHEMA.get(name)
        if spec is None:
            parser.warning(span, "W_UNKNOWN_FIELD", f"unknown field {name!r} in decision block")
            i += 1
            continue
        sc = _Scanner(value_text)
        try:
            block.fields[name] = spec.parser(sc)
            block.field_spans[name] = span
        except _ValueError_ as exc:
            parser.error(
                SourceSpan(path, line_no, value_col + exc.offset, 1),
                "E_FIELD_VALUE",
                f"{name}: {exc}",
            )
        i += 1
    parser.error(block.span, "E_UNCLOSED_BLOCK", "decision block never closed")
    return i


def serialize_decisions(decisions: Sequence[Decision]) -> str:
    from .canonical import render_attribution, render_string

    parts: list[str] = ["# decisions v1"]
    for d in sorted(decisions, key=lambda d: d.id):
        parts.append("")
        parts.append(f"decision {render_string(d.id)} {{")
        parts.append(f"  proposal: {render_string(d.proposal)}")
        parts.append(f"  verdict: {d.verdict.value}")
        parts.append(f"  decided_by: {render_attribution(d.decided_by)}")
        parts.append(f"  rationale: {render_string(d.rationale)}")
        parts.append(f"  bundle_digest: {render_string(d.bundle_digest)}")
        parts.append("}")
    return "\n".join(parts) + "\n"
