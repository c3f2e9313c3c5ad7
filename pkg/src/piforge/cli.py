"""Command-line entry point exposing the full pipeline for CI and workshops.

One subcommand per process activity: validate, init, propose, harmonize,
trace, coverage, synth, resolve, report, serve.  Exit codes: 0 success,
1 findings with errors or failed feasibility, 2 usage error, 3 internal
error.  Output ordering is deterministic; PIFORGE_NO_COLOR (or a
non-tty standard output) disables styling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import report as docs
from .diagnostics import Diagnostic, Severity
from .engine import (
    SYSTEM_ARCHITECT,
    SYSTEM_COORDINATOR,
    Phase,
    Resolution,
    ResolutionKind,
    init_process,
    resolve_conflict,
    run_harmonization,
    run_interface_definition,
    submit_perspective,
)
from .errors import PiforgeError
from .graph import edges_tsv, nodes_tsv
from .harmonize import propose_merges
from .model import Attribution, ItemBundle, Perspective, Role
from .pid import parse_decisions, parse_pid
from .store import load_project, save_project
from .units import BIT, HERTZ, SECOND, Quantity

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_RESET = "\x1b[0m"
_COLORS = {"error": "\x1b[31m", "warning": "\x1b[33m", "ok": "\x1b[32m"}


def _use_color() -> bool:
    if os.environ.get("PIFORGE_NO_COLOR"):
        return False
    return sys.stdout.isatty()


def _sty(text: str, kind: str) -> str:
    if not _use_color():
        return text
    return f"{_COLORS[kind]}{text}{_RESET}"


def _short(digest: str) -> str:
    return digest[:12]


def _read_sources(paths: Sequence[str]) -> list[tuple[str, str]]:
    return [(p, Path(p).read_text(encoding="utf-8")) for p in paths]


def _print_diagnostics(diagnostics: Sequence[Diagnostic]) -> tuple[int, int]:
    errors = 0
    warnings = 0
    for diag in diagnostics:
        line = diag.render()
        if diag.severity is Severity.ERROR:
            errors += 1
            print(_sty(line, "error"))
        else:
            warnings += 1
            print(_sty(line, "warning"))
    return errors, warnings


def _parse_actor(text: str) -> Attribution:
    role_text, sep, name = text.partition(":")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(
            f"actor must look like role:name, got {text!r}"
        )
    try:
        role = Role(role_text.strip())
    except ValueError:
        valid = ", ".join(r.value for r in Role)
        raise argparse.ArgumentTypeError(
            f"unknown role {role_text.strip()!r}; one of: {valid}"
        ) from None
    return Attribution(role, name.strip())


def _emit(doc, args) -> None:
    """Write the machine report: pretty on stdout, compact to --out."""

    if getattr(args, "out", None):
        Path(args.out).write_text(
            json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )
    if getattr(args, "format", "text") == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))


# Commands ---------------------------------------------------------------


def _cmd_validate(args) -> int:
    result = parse_pid(_read_sources(args.files))
    errors, warnings = _print_diagnostics(result.diagnostics)
    summary = f"{len(result.bundle.proposals)} PIs, {errors} errors, {warnings} warnings"
    print(summary)
    doc = {
        "pis": len(result.bundle.proposals),
        "errors": errors,
        "warnings": warnings,
        "diagnostics": [
            {
                "code": d.code,
                "severity": d.severity.value,
                "message": d.message,
                "span": None
                if d.span is None
                else {"file": d.span.file, "line": d.span.line},
            }
            for d in result.diagnostics
        ],
    }
    _emit(doc, args)
    return EXIT_FINDINGS if errors else EXIT_OK


def _cmd_init(args) -> int:
    result = parse_pid(_read_sources(args.files))
    errors, _ = _print_diagnostics(result.diagnostics)
    if errors:
        print(_sty("init aborted: bundle has errors", "error"))
        return EXIT_FINDINGS
    state = init_process(result.bundle, actor=args.actor)
    project = Path(args.project)
    project.mkdir(parents=True, exist_ok=True)
    save_project(state, project)
    print(f"initialized {project} at digest {_short(state.current_digest)}")
    print(f"phase: {state.phase.value}")
    return EXIT_OK


def _new_proposals(state_bundle: ItemBundle, merged: ItemBundle):
    existing = {p.id for p in state_bundle.proposals}
    return [p for p in merged.proposals if p.id not in existing]


def _cmd_propose(args) -> int:
    state = load_project(args.project)
    base = str(Path(args.project) / "bundle.pid")
    result = parse_pid(_read_sources([base] + list(args.files)))
    errors, _ = _print_diagnostics(result.diagnostics)
    if errors:
        print(_sty("propose aborted: proposal files have errors", "error"))
        return EXIT_FINDINGS
    fresh = _new_proposals(state.bundle, result.bundle)
    branch = Perspective(args.branch)
    state = submit_perspective(state, branch, fresh, args.actor)
    save_project(state, args.project)
    print(
        f"submitted {len(fresh)} {branch.value} proposals "
        f'by {args.actor.role.value} "{args.actor.name}"'
    )
    print(f"phase: {state.phase.value}")
    print(f"digest: {_short(state.current_digest)}")
    return EXIT_OK


def _print_queue(state) -> None:
    proposals = propose_merges(
        state.bundle.proposals, state.threshold, state.suppressions
    )
    for prop in proposals:
        a, b = prop.candidates
        other = b if prop.suggested_canonical == a else a
        print(
            f"{prop.id} score {prop.score:.2f} "
            f"{prop.suggested_canonical} <= {other}"
        )
        print(f"  reasons: {', '.join(prop.reasons)}")
    noun = "proposal" if len(proposals) == 1 else "proposals"
    print(f"{len(proposals)} open merge {noun} at digest {_short(state.current_digest)}")


def _cmd_harmonize(args) -> int:
    state = load_project(args.project)
    if args.decisions is None:
        if state.phase in (Phase.PI_LOG_DRAFT, Phase.HARMONIZATION):
            open_props = propose_merges(
                state.bundle.proposals, state.threshold, state.suppressions
            )
            if open_props:
                _print_queue(state)
                return EXIT_OK
            # Nothing to decide: run the review so the phase advances.
            state = run_harmonization(state, [])
            save_project(state, args.project)
        print(f"harmonization complete; phase: {state.phase.value}")
        print(f"digest: {_short(state.current_digest)}")
        return EXIT_OK
    decisions, diags = parse_decisions(
        Path(args.decisions).read_text(encoding="utf-8"), path=args.decisions
    )
    errors, _ = _print_diagnostics(diags)
    if errors:
        print(_sty("harmonize aborted: decisions file has errors", "error"))
        return EXIT_FINDINGS
    state = run_harmonization(state, decisions)
    save_project(state, args.project)
    print(f"applied {len(decisions)} decisions")
    if state.phase is Phase.HARMONIZATION:
        _print_queue(state)
    print(f"phase: {state.phase.value}")
    print(f"digest: {_short(state.current_digest)}")
    return EXIT_OK


def _cmd_trace(args) -> int:
    state = load_project(args.project)
    doc = docs.trace_document(state, args.id)
    print(f"pi: {doc['pi']} ({doc['perspective']})")
    for entry in doc["proposed_by"]:
        print(f"proposed by: {entry['role']} \"{entry['name']}\"")
    for path in doc["paths"]:
        print("  " + " -> ".join(path))
    noun = "path" if len(doc["paths"]) == 1 else "paths"
    print(f"{len(doc['paths'])} origin {noun}")
    _emit(doc, args)
    return EXIT_OK


def _cmd_coverage(args) -> int:
    state = load_project(args.project)
    doc = docs.coverage_document(state)

    def show(label: str, ids: list) -> None:
        print(f"{label}: {', '.join(ids) if ids else 'none'}")

    show("orphan PIs", doc["orphan_pis"])
    show("unmonitored requirements", doc["unmonitored_requirements"])
    show("unobserved failure modes", doc["unobserved_failure_modes"])
    if doc["clean"]:
        print(_sty("coverage clean", "ok"))
        _emit(doc, args)
        return EXIT_OK
    print(_sty("coverage has gaps", "error"))
    _emit(doc, args)
    return EXIT_FINDINGS


def _write_graph_files(state, project: Path) -> None:
    graph = docs.state_graph(state)
    (project / "nodes.tsv").write_text(nodes_tsv(graph), encoding="utf-8")
    (project / "edges.tsv").write_text(edges_tsv(graph), encoding="utf-8")


def _cmd_synth(args) -> int:
    state = load_project(args.project)
    if state.phase is Phase.INTERFACES_DEFINED:
        print("interfaces already defined; nothing to do")
        print(f"digest: {_short(state.current_digest)}")
        return EXIT_OK
    if args.warn_utilization is not None:
        state = replace(state, warn_utilization=args.warn_utilization)
    state = run_interface_definition(state, SYSTEM_ARCHITECT)
    save_project(state, args.project)
    _write_graph_files(state, Path(args.project))

    for entry in docs.interface_document(state):
        tag = entry["status"]
        line = (
            f"{entry['id']}: {entry['encoding']} on {entry['bus']} "
            f"{entry['payload_bits']} bits @ {entry['rate_hz']} Hz [{tag}]"
        )
        print(_sty(line, "error") if tag == "non_viable" else line)
    if state.conflicts:
        for conflict in state.conflicts:
            affected = ", ".join(conflict.affected) or "none"
            print(_sty(f"conflict {conflict.id}: {conflict.reason}", "error"))
            print(f"  affects: {affected}")
        noun = "conflict" if len(state.conflicts) == 1 else "conflicts"
        print(f"{len(state.conflicts)} {noun} open; phase: {state.phase.value}")
        return EXIT_FINDINGS
    if state.phase is Phase.INTERFACES_DEFINED:
        print(_sty("all interfaces integrated", "ok"))
        print("wrote icd.txt, idl.txt, nodes.tsv, edges.tsv")
    else:
        print(f"phase: {state.phase.value}")
    print(f"digest: {_short(state.current_digest)}")
    return EXIT_OK if state.phase is Phase.INTERFACES_DEFINED else EXIT_FINDINGS


def _cmd_resolve(args) -> int:
    state = load_project(args.project)

    def quantity(value: Optional[float], unit) -> Optional[Quantity]:
        return None if value is None else Quantity(value, unit)

    resolution = Resolution(
        kind=ResolutionKind(args.action),
        rationale=args.rationale,
        new_rate=quantity(args.rate, HERTZ),
        new_payload=quantity(args.payload, BIT),
        new_freshness=quantity(args.freshness, SECOND),
        target_bus=args.bus,
    )
    state = resolve_conflict(state, args.conflict, resolution, args.actors)
    save_project(state, args.project)
    print(f"resolved {args.conflict} via {resolution.kind.value}")
    remaining = len(state.conflicts)
    noun = "conflict" if remaining == 1 else "conflicts"
    print(f"{remaining} {noun} remain; rerun synth to continue")
    print(f"digest: {_short(state.current_digest)}")
    return EXIT_OK


def _cmd_report(args) -> int:
    state = load_project(args.project)
    doc = docs.full_report(state)
    if args.format == "text":
        process = doc["process"]
        print(f"phase: {process['phase']}")
        print(f"digest: {process['digest']}")
        print(f"PIs: {len(doc['pilog'])}")
        print(f"open merge proposals: {len(doc['proposals'])}")
        print(f"open conflicts: {len(doc['conflicts'])}")
        print(f"interfaces: {len(process['interfaces'])}")
        for entry in doc["proreq"]:
            mark = "pass" if entry["satisfied"] else "FAIL"
            line = f"PRO-REQ {entry['id']}: {mark}  {entry['evidence']}"
            print(_sty(line, "ok" if entry["satisfied"] else "error"))
        clean = doc["coverage"]["clean"]
        print("coverage: " + ("clean" if clean else "gaps"))
    _emit(doc, args)
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .api import serve

    if args.ui is not None and not Path(args.ui).is_dir():
        print(_sty(f"error: --ui directory {args.ui!r} does not exist", "error"))
        return EXIT_USAGE
    handle = serve(
        args.project,
        port=args.port,
        read_only=args.read_only,
        static_dir=args.ui,
    )
    mode = " (read-only)" if args.read_only else ""
    ui = f" with workbench assets from {args.ui}" if args.ui else ""
    print(f"serving {args.project} on {handle.base_url}{mode}{ui}")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()
    return EXIT_OK


# Wiring -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piforge",
        description="Specification compiler and traceability toolkit for "
        "performance indicator interfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_project(p):
        p.add_argument("--project", required=True, help="project state directory")
        return p

    def with_report(p):
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--out", help="write the machine report to this file")
        return p

    p = sub.add_parser("validate", help="parse and validate PID files")
    p.add_argument("files", nargs="+")
    with_report(p)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("init", help="start a project from an item definition")
    with_project(p)
    p.add_argument("files", nargs="+")
    p.add_argument(
        "--actor",
        type=_parse_actor,
        default=SYSTEM_COORDINATOR,
        help="role:name of the initiating coordinator",
    )
    p.set_defaults(fn=_cmd_init)

    p = sub.add_parser("propose", help="submit one analysis branch's PIs")
    with_project(p)
    p.add_argument("files", nargs="+")
    p.add_argument(
        "--branch", required=True, choices=[b.value for b in Perspective]
    )
    p.add_argument("--actor", type=_parse_actor, required=True)
    p.set_defaults(fn=_cmd_propose)

    p = sub.add_parser("harmonize", help="list or decide merge proposals")
    with_project(p)
    p.add_argument("--decisions", help="decisions file to apply")
    p.set_defaults(fn=_cmd_harmonize)

    p = sub.add_parser("trace", help="show a PI's origin paths")
    with_project(p)
    p.add_argument("id")
    with_report(p)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("coverage", help="report traceability gaps")
    with_project(p)
    with_report(p)
    p.set_defaults(fn=_cmd_coverage)

    p = sub.add_parser("synth", help="allocate interfaces and emit artifacts")
    with_project(p)
    p.add_argument("--warn-utilization", type=float, default=None)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("resolve", help="settle one open conflict")
    with_project(p)
    p.add_argument("conflict")
    p.add_argument(
        "--action", required=True, choices=[k.value for k in ResolutionKind]
    )
    p.add_argument(
        "--actors",
        required=True,
        type=lambda text: [_parse_actor(t) for t in text.split(",")],
        help="comma-separated role:name signers",
    )
    p.add_argument("--rationale", required=True)
    p.add_argument("--rate", type=float, help="new rate in Hz (adjust_pi)")
    p.add_argument("--payload", type=float, help="new payload in bit (adjust_pi)")
    p.add_argument("--freshness", type=float, help="new freshness in s (adjust_pi)")
    p.add_argument("--bus", help="target bus (reallocate_bus)")
    p.set_defaults(fn=_cmd_resolve)

    p = sub.add_parser("report", help="full project report")
    with_project(p)
    with_report(p)
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("serve", help="run the workbench API")
    with_project(p)
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--read-only", action="store_true")
    p.add_argument("--ui", help="directory of built workbench assets to serve")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except PiforgeError as exc:
        print(_sty(f"error: {exc}", "error"))
        return EXIT_FINDINGS
    except OSError as exc:
        print(_sty(f"error: {exc}", "error"))
        return EXIT_FINDINGS
    except Exception as exc:  # pragma: no cover - defensive
        print(_sty(f"internal error: {exc!r}", "error"))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
