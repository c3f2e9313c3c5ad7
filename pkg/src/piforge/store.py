"""Plain-text project directory persistence.

A project is reviewable without the tool: canonical bundle text, one
decision block per ruling, one audit event per line, and a tab-separated
state file.  Loading verifies the stored digest against the bundle, so
out-of-band edits surface as an integrity failure rather than silently
rewriting history.
"""

from __future__ import annotations

from pathlib import Path

from .canonical import serialize_bundle, snapshot_hash
from .engine import (
    AuditEvent,
    Conflict,
    Phase,
    ProcessState,
)
from .errors import DigestMismatch, UninitializedProject
from .model import Attribution, Role
from .pid import parse_decisions, parse_pid_text, serialize_decisions
from .synth import Encoding, InterfaceStatus, PiInterface
from .units import HERTZ, SECOND, Quantity

BUNDLE_FILE = "bundle.pid"
STATE_FILE = "state.txt"
DECISIONS_FILE = "decisions.log"
AUDIT_FILE = "audit.log"
ICD_FILE = "icd.txt"
IDL_FILE = "idl.txt"


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def _state_lines(state: ProcessState) -> str:
    lines = [
        f"phase\t{state.phase.value}",
        f"top_down_done\t{'true' if state.top_down_done else 'false'}",
        f"bottom_up_done\t{'true' if state.bottom_up_done else 'false'}",
        f"harmonization_iteration\t{state.harmonization_iteration}",
        f"interface_iteration\t{state.interface_iteration}",
        f"threshold\t{state.threshold!r}",
        f"warn_utilization\t{state.warn_utilization!r}",
        f"digest\t{state.current_digest}",
    ]
    for a, b in sorted(state.suppressions):
        lines.append(f"suppression\t{a}\t{b}")
    for pi, bus in state.allocation_overrides:
        lines.append(f"override\t{pi}\t{bus}")
    for c in state.conflicts:
        lines.append(
            f"conflict\t{c.id}\t{c.pi}\t{_clean(c.reason)}\t{','.join(c.affected)}"
        )
    for i in state.interfaces:
        lines.append(
            "interface\t"
            + "\t".join(
                (
                    i.id,
                    i.pi,
                    i.provider_service,
                    i.bus,
                    i.encoding.value,
                    repr(i.rate.value),
                    str(i.payload_bits),
                    repr(i.freshness.value),
                    i.status.value,
                )
            )
        )
    return "\n".join(lines) + "\n"


def save_project(state: ProcessState, project_dir: str | Path) -> None:
    root = Path(project_dir)
    root.mkdir(parents=True, exist_ok=True)
    (root / BUNDLE_FILE).write_text(serialize_bundle(state.bundle), encoding="utf-8")
    (root / STATE_FILE).write_text(_state_lines(state), encoding="utf-8")
    (root / DECISIONS_FILE).write_text(
        serialize_decisions(state.decisions), encoding="utf-8"
    )
    from .engine import audit_log_text

    (root / AUDIT_FILE).write_text(audit_log_text(state.audit), encoding="utf-8")
    if state.icd_text is not None:
        (root / ICD_FILE).write_text(state.icd_text, encoding="utf-8")
    if state.idl_text is not None:
        (root / IDL_FILE).write_text(state.idl_text, encoding="utf-8")


def _parse_audit(text: str) -> tuple[AuditEvent, ...]:
    events: list[AuditEvent] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 8:
            raise DigestMismatch(f"audit line has {len(parts)} fields, not 8: {line!r}")
        seq, timestamp, role, name, action, subject, before, after = parts
        events.append(
            AuditEvent(
                seq=int(seq),
                actor=Attribution(Role(role), name),
                action=action,
                subject=subject,
                digest_before=before,
                digest_after=after,
                timestamp=timestamp,
            )
        )
    return tuple(events)


def load_project(project_dir: str | Path) -> ProcessState:
    root = Path(project_dir)
    state_path = root / STATE_FILE
    if not state_path.is_file():
        raise UninitializedProject(
            f"{root} has no {STATE_FILE}; run init first"
        )

    result = parse_pid_text(
        (root / BUNDLE_FILE).read_text(encoding="utf-8"), str(root / BUNDLE_FILE)
    )
    if not result.ok:
        messages = "; ".join(
            d.message for d in result.diagnostics if d.severity.value == "error"
        )
        raise DigestMismatch(f"stored bundle does not parse cleanly: {messages}")
    bundle = result.bundle

    phase = Phase.ITEM_DEFINED
    fields: dict[str, str] = {}
    suppressions: set[tuple[str, str]] = set()
    overrides: list[tuple[str, str]] = []
    conflicts: list[Conflict] = []
    interfaces: list[PiInterface] = []
    for line in state_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        key = parts[0]
        if key == "suppression" and len(parts) == 3:
            suppressions.add((parts[1], parts[2]))
        elif key == "override" and len(parts) == 3:
            overrides.append((parts[1], parts[2]))
        elif key == "conflict" and len(parts) == 5:
            affected = tuple(x for x in parts[4].split(",") if x)
            conflicts.append(
                Conflict(id=parts[1], pi=parts[2], reason=parts[3], affected=affected)
            )
        elif key == "interface" and len(parts) == 10:
            interfaces.append(
                PiInterface(
                    id=parts[1],
                    pi=parts[2],
                    provider_service=parts[3],
                    bus=parts[4],
                    encoding=Encoding(parts[5]),
                    rate=Quantity(float(parts[6]), HERTZ),
                    payload_bits=int(parts[7]),
                    freshness=Quantity(float(parts[8]), SECOND),
                    status=InterfaceStatus(parts[9]),
                )
            )
        elif len(parts) == 2:
            fields[key] = parts[1]

    digest = fields.get("digest", "")
    actual = snapshot_hash(bundle)
    if digest != actual:
        raise DigestMismatch(
            f"stored digest {digest[:12]}... does not match bundle {actual[:12]}..."
        )
    phase = Phase(fields.get("phase", Phase.ITEM_DEFINED.value))

    decisions_path = root / DECISIONS_FILE
    decisions = ()
    if decisions_path.is_file():
        parsed, diags = parse_decisions(
            decisions_path.read_text(encoding="utf-8"), str(decisions_path)
        )
        if any(d.severity.value == "error" for d in diags):
            messages = "; ".join(d.message for d in diags)
            raise DigestMismatch(f"stored decisions do not parse: {messages}")
        decisions = tuple(parsed)

    audit_path = root / AUDIT_FILE
    audit = (
        _parse_audit(audit_path.read_text(encoding="utf-8"))
        if audit_path.is_file()
        else ()
    )

    icd_path = root / ICD_FILE
    idl_path = root / IDL_FILE
    return ProcessState(
        bundle=bundle,
        phase=phase,
        current_digest=digest,
        top_down_done=fields.get("top_down_done") == "true",
        bottom_up_done=fields.get("bottom_up_done") == "true",
        harmonization_iteration=int(fields.get("harmonization_iteration", "0")),
        interface_iteration=int(fields.get("interface_iteration", "0")),
        threshold=float(fields.get("threshold", "0.6")),
        warn_utilization=float(fields.get("warn_utilization", "0.8")),
        suppressions=frozenset(suppressions),
        decisions=decisions,
        conflicts=tuple(conflicts),
        allocation_overrides=tuple(sorted(overrides)),
        interfaces=tuple(interfaces),
        icd_text=icd_path.read_text(encoding="utf-8") if icd_path.is_file() else None,
        idl_text=idl_path.read_text(encoding="utf-8") if idl_path.is_file() else None,
        audit=audit,
    )
