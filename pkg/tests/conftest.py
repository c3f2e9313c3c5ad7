"""Shared fixtures: corpus paths, pipeline drivers, bundle generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from piforge.canonical import canonicalize_bundle
from piforge.engine import (
    ProcessState,
    fixed_clock,
    init_process,
    run_harmonization,
    run_interface_definition,
    submit_perspective,
)
from piforge.harmonize import propose_merges
from piforge.model import (
    ArchitectureModel,
    Attribution,
    Bus,
    FailureMode,
    ItemBundle,
    ItemDefinition,
    PerformanceIndicator,
    Perspective,
    Role,
    SafetyRequirement,
    Scenario,
    Service,
    UncertaintyKind,
    UncertaintySpec,
    ValueRange,
    Effect,
    AnalysisMethod,
)
from piforge.pid import Decision, Verdict, parse_pid
from piforge.units import Quantity, parse_unit

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

COORDINATOR = Attribution(Role.SELF_PERCEPTION_COORDINATOR, "Alex Chen")
SAFETY = Attribution(Role.SAFETY_ENGINEER, "Mara Ellis")
EXPERT = Attribution(Role.FUNCTION_EXPERT, "Jonas Weber")
ARCHITECT = Attribution(Role.ARCHITECTURAL_SYSTEM_ENGINEER, "Noor Haddad")

CLOCK = fixed_clock("2024-03-01T09:00:00+00:00")


def read_fixture(name: str) -> tuple[str, str]:
    path = FIXTURES / name
    return str(path), path.read_text(encoding="utf-8")


def parse_fixtures(*names: str) -> ItemBundle:
    result = parse_pid([read_fixture(n) for n in names])
    bad = [d.render() for d in result.diagnostics if d.severity.value == "error"]
    assert not bad, bad
    return result.bundle


def branch_proposals(base: ItemBundle, merged: ItemBundle) -> list[PerformanceIndicator]:
    known = {p.id for p in base.proposals}
    return [p for p in merged.proposals if p.id not in known]


def drive_crosswalk(stop: str = "defined", clock=CLOCK) -> ProcessState:
    """Run the reference pipeline up to a named stage.

    Stages: init, analysis, draft, harmonized, defined.
    """

    base = parse_fixtures("crosswalk_base.pid")
    state = init_process(base, actor=COORDINATOR, clock=clock)
    if stop == "init":
        return state

    topdown = branch_proposals(base, parse_fixtures("crosswalk_base.pid", "crosswalk_topdown.pid"))
    state = submit_perspective(state, Perspective.TOP_DOWN, topdown, SAFETY, clock)
    if stop == "analysis":
        return state

    bottomup = branch_proposals(base, parse_fixtures("crosswalk_base.pid", "crosswalk_bottomup.pid"))
    state = submit_perspective(state, Perspective.BOTTOM_UP, bottomup, EXPERT, clock)
    if stop == "draft":
        return state

    queue = propose_merges(state.bundle.proposals, state.threshold, state.suppressions)
    decisions = [
        Decision(
            id=f"D-{n:03d}",
            proposal=mp.id,
            verdict=Verdict.MERGE,
            decided_by=COORDINATOR,
            rationale="same sensor chain measures one platform temperature",
            bundle_digest=state.current_digest,
        )
        for n, mp in enumerate(queue, start=1)
    ]
    state = run_harmonization(state, decisions, clock)
    if stop == "harmonized":
        return state

    return run_interface_definition(state, ARCHITECT, clock)


@pytest.fixture
def crosswalk_defined() -> ProcessState:
    return drive_crosswalk("defined")


@pytest.fixture
def crosswalk_draft() -> ProcessState:
    return drive_crosswalk("draft")


# Generators -------------------------------------------------------------
#
# Both the hypothesis strategies and the seeded plain-random generator
# build the same shape of bundle; the plain generator exists so timed
# acceptance runs control their own example count and seed.

UNIT_POOL = ["1", "s", "m", "K", "°C", "Hz", "bit", "m/s", "bit/s"]
_UNITS = {expr: parse_unit(expr) for expr in UNIT_POOL}
_SEGMENTS = ["hw", "env", "cpu", "temp", "rate", "err", "lag", "sense", "io", "bus"]
_WORDS = [
    "running", "estimate", "of", "platform", "signal", "quality", "under",
    "sustained", "load", "for", "the", "monitor", "chain", "budget",
]

_ROLES = list(Role)
_EFFECTS = list(Effect)
_METHODS = list(AnalysisMethod)


def _rng_text(rng: random.Random, lo: int = 10, hi: int = 40) -> str:
    out = []
    while len(" ".join(out)) < rng.randint(lo, hi):
        out.append(rng.choice(_WORDS))
    return " ".join(out)


def _rng_pi_id(rng: random.Random) -> str:
    return ".".join(rng.sample(_SEGMENTS, rng.randint(1, 3)))


def _rng_uncertainty(rng: random.Random) -> UncertaintySpec:
    roll = rng.random()
    if roll < 0.4:
        return UncertaintySpec()
    if roll < 0.6:
        return UncertaintySpec(
            kind=UncertaintyKind.INTERVAL, magnitude=rng.uniform(0, 10)
        )
    if roll < 0.8:
        return UncertaintySpec(
            kind=UncertaintyKind.STANDARD_DEVIATION, magnitude=rng.uniform(0, 10)
        )
    return UncertaintySpec(kind=UncertaintyKind.QUALITATIVE, note=_rng_text(rng))


def random_pi(
    rng: random.Random,
    pi_id: str,
    providers: list[str],
    trace_pool: list[str],
) -> PerformanceIndicator:
    unit = _UNITS[rng.choice(UNIT_POOL)]
    a, b = sorted((rng.uniform(-1e6, 1e6), rng.uniform(-1e6, 1e6)))
    n_traces = rng.randint(0, min(3, len(trace_pool)))
    return PerformanceIndicator(
        id=pi_id,
        description=_rng_text(rng),
        unit=unit,
        range=ValueRange(Quantity(a, unit), Quantity(b, unit)),
        perspective=rng.choice(list(Perspective)),
        proposed_by=(
            Attribution(rng.choice(_ROLES), f"member {rng.randint(1, 9)}"),
        ),
        provider=rng.choice(providers),
        rate=Quantity(rng.uniform(0.1, 100.0), _UNITS["Hz"]),
        payload=Quantity(float(rng.randint(1, 512)), _UNITS["bit"]),
        freshness=Quantity(rng.uniform(0.01, 10.0), _UNITS["s"]),
        uncertainty=_rng_uncertainty(rng),
        traces=frozenset(rng.sample(trace_pool, n_traces)) if n_traces else frozenset(),
        integral=rng.random() < 0.3,
    )


def random_bundle(rng: random.Random) -> ItemBundle:
    """One canonicalized, fully cross-consistent random bundle."""

    scenarios = tuple(
        Scenario(id=f"SCN-{i:03d}", description=_rng_text(rng))
        for i in range(1, rng.randint(2, 3))
    )
    functions = rng.sample(
        ["fn_sense", "fn_fuse", "fn_watch", "fn_plan", "fn_log"], rng.randint(1, 4)
    )
    buses = tuple(
        Bus(
            id=f"bus{i}",
            capacity=Quantity(rng.uniform(1e4, 1e8), _UNITS["bit/s"]),
            base_latency=Quantity(rng.uniform(1e-5, 1e-2), _UNITS["s"]),
        )
        for i in range(rng.randint(1, 2))
    )
    cut = rng.randint(1, len(functions))
    groups = [functions[:cut], functions[cut:]]
    services = []
    attachments = {}
    for i, group in enumerate(g for g in groups if g):
        sid = f"svc.part{i}"
        services.append(Service(id=sid, functions=tuple(group)))
        attachments[sid] = tuple(
            sorted(rng.sample([b.id for b in buses], rng.randint(1, len(buses))))
        )
    requirements = []
    for i in range(rng.randint(0, 3)):
        requirements.append(
            SafetyRequirement(
                id=f"SR-{i:03d}",
                statement=_rng_text(rng),
                scenario=rng.choice(scenarios).id,
                hazard=_rng_text(rng) if rng.random() < 0.5 else None,
                parent=rng.choice(requirements).id
                if requirements and rng.random() < 0.4
                else None,
                needs_runtime_monitoring=rng.random() < 0.5,
            )
        )
    failure_modes = [
        FailureMode(
            id=f"FM-{i:03d}",
            function=rng.choice(functions),
            mechanism=_rng_text(rng),
            effect=rng.choice(_EFFECTS),
            method=rng.choice(_METHODS),
        )
        for i in range(rng.randint(0, 2))
    ]
    trace_pool = [r.id for r in requirements] + [f.id for f in failure_modes]
    pi_ids = set()
    while len(pi_ids) < rng.randint(0, 6):
        pi_ids.add(_rng_pi_id(rng))
    pis = [random_pi(rng, pid, functions, trace_pool) for pid in sorted(pi_ids)]
    return canonicalize_bundle(
        ItemBundle(
            item=ItemDefinition(
                name="generated item",
                use_cases=(_rng_text(rng),),
                scenarios=scenarios,
            ),
            architecture=ArchitectureModel(
                services=tuple(services),
                buses=buses,
                attachments=attachments,
            ),
            requirements=tuple(requirements),
            failure_modes=tuple(failure_modes),
            proposals=tuple(pis),
        )
    )


@st.composite
def generated_bundles(draw) -> ItemBundle:
    seed = draw(st.integers(min_value=0, max_value=2**48))
    return random_bundle(random.Random(seed))


@st.composite
def generated_pi_logs(draw, max_size: int = 20) -> list[PerformanceIndicator]:
    """PI lists with deliberately collision-prone dotted ids."""

    seed = draw(st.integers(min_value=0, max_value=2**48))
    size = draw(st.integers(min_value=0, max_value=max_size))
    rng = random.Random(seed)
    ids = set()
    while len(ids) < size:
        ids.add(_rng_pi_id(rng))
    pool = ["SR-000", "FM-000"]
    return [random_pi(rng, pid, ["fn_sense"], pool) for pid in sorted(ids)]
