#!/usr/bin/env python3
"""Drive the reference crosswalk project end to end and narrate each step.

Creates (or reuses) a project directory, walks item definition, both
analysis branches, harmonization of the duplicate temperature PI,
interface synthesis, and the compliance checklist, then optionally
leaves the review API running on top of the result.

    python3 scripts/run_crosswalk_demo.py
    python3 scripts/run_crosswalk_demo.py --project-dir /tmp/crosswalk --serve
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from piforge.api import serve  # noqa: E402
from piforge.engine import (  # noqa: E402
    init_process,
    proreq_checklist,
    run_harmonization,
    run_interface_definition,
    submit_perspective,
)
from piforge.harmonize import propose_merges  # noqa: E402
from piforge.model import Attribution, Perspective, Role  # noqa: E402
from piforge.pid import Decision, Verdict, parse_pid  # noqa: E402
from piforge.store import save_project  # noqa: E402

FIXTURES = REPO / "fixtures"

COORDINATOR = Attribution(Role.SELF_PERCEPTION_COORDINATOR, "Alex Chen")
SAFETY = Attribution(Role.SAFETY_ENGINEER, "Mara Ellis")
EXPERT = Attribution(Role.FUNCTION_EXPERT, "Jonas Weber")
ARCHITECT = Attribution(Role.ARCHITECTURAL_SYSTEM_ENGINEER, "Noor Haddad")


def _parse(*names: str):
    sources = [(str(FIXTURES / n), (FIXTURES / n).read_text("utf-8")) for n in names]
    result = parse_pid(sources)
    if not result.ok:
        for diagnostic in result.diagnostics:
            print(diagnostic.render(), file=sys.stderr)
        raise SystemExit(1)
    return result.bundle


def _branch(base, merged):
    known = {p.id for p in base.proposals}
    return [p for p in merged.proposals if p.id not in known]


def _step(title: str, state) -> None:
    print(f"==> {title}")
    print(f"    phase {state.phase.value}, digest {state.current_digest[:12]}...")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--project-dir", help="directory to write the project into")
    parser.add_argument("--serve", action="store_true",
                        help="keep the review API running afterwards")
    parser.add_argument("--port", type=int, default=0,
                        help="port for --serve (0 picks a free one)")
    args = parser.parse_args()

    project = Path(args.project_dir) if args.project_dir else Path(
        tempfile.mkdtemp(prefix="crosswalk_demo_")
    )
    project.mkdir(parents=True, exist_ok=True)

    base = _parse("crosswalk_base.pid")
    state = init_process(base, actor=COORDINATOR)
    _step("item definition accepted", state)

    topdown = _branch(base, _parse("crosswalk_base.pid", "crosswalk_topdown.pid"))
    state = submit_perspective(state, Perspective.TOP_DOWN, topdown, SAFETY)
    _step(f"top-down branch submitted ({len(topdown)} PIs)", state)

    bottomup = _branch(base, _parse("crosswalk_base.pid", "crosswalk_bottomup.pid"))
    state = submit_perspective(state, Perspective.BOTTOM_UP, bottomup, EXPERT)
    _step(f"bottom-up branch submitted ({len(bottomup)} PIs)", state)

    queue = propose_merges(state.bundle.proposals, state.threshold,
                           state.suppressions)
    for proposal in queue:
        a, b = proposal.candidates
        print(f"    merge proposal {proposal.id}: {a} ~ {b} "
              f"(score {proposal.score:.2f})")
    decisions = [
        Decision(
            id=f"D-{n:03d}",
            proposal=proposal.id,
            verdict=Verdict.MERGE,
            decided_by=COORDINATOR,
            rationale="same sensor chain measures one platform temperature",
            bundle_digest=state.current_digest,
        )
        for n, proposal in enumerate(queue, start=1)
    ]
    state = run_harmonization(state, decisions)
    _step(f"harmonization ruled on {len(decisions)} proposal(s)", state)
    print(f"    consolidated log holds {len(state.bundle.proposals)} PIs")

    state = run_interface_definition(state, ARCHITECT)
    _step("interface synthesis", state)
    for interface in state.interfaces:
        print(f"    {interface.id}: {interface.encoding.value} on "
              f"{interface.bus}, {interface.payload_bits} bit at "
              f"{interface.rate.value:g} Hz")

    for entry in proreq_checklist(state):
        mark = "pass" if entry.satisfied else "FAIL"
        print(f"    PRO-REQ {entry.id}: {mark} ({entry.evidence})")

    save_project(state, project)
    print(f"==> project saved to {project}")
    for name in ("bundle.pid", "state.txt", "decisions.log", "audit.log",
                 "icd.txt", "idl.txt"):
        path = project / name
        if path.exists():
            print(f"    {name}: {path.stat().st_size} bytes")

    if args.serve:
        server = serve(project, port=args.port, read_only=False)
        print(f"==> review API at {server.base_url} (Ctrl-C to stop)")
        try:
            while True:
                server._thread.join(1)
        except KeyboardInterrupt:
            server.stop()
            print("stopped")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
