"""HTTP facade: canonical reads, digest-gated writes, error mapping."""

from __future__ import annotations

import http.client
import json
import socket
import urllib.error
import urllib.request

import pytest

from conftest import ARCHITECT, CLOCK, COORDINATOR, EXPERT, SAFETY, drive_crosswalk
from piforge.api import serve
from piforge.engine import (
    Phase,
    init_process,
    run_harmonization,
    run_interface_definition,
    submit_perspective,
)
from piforge.errors import PortUnavailable, UninitializedProject
from piforge.model import (
    Attribution,
    PerformanceIndicator,
    Perspective,
    Role,
    UncertaintyKind,
    UncertaintySpec,
    ValueRange,
)
from piforge.pid import parse_pid_text
from piforge.store import load_project, save_project
from piforge.units import Quantity, parse_unit

MERGE_PROPOSAL = "MP-6b3de890"

COORDINATOR_DOC = {"role": "self_perception_coordinator", "name": "Alex Chen"}
ARCHITECT_DOC = {"role": "architectural_system_engineer", "name": "Noor Haddad"}
RESOLUTION_ACTORS = [COORDINATOR_DOC, ARCHITECT_DOC]

NARROW_BUS_ITEM = """
item {
  name: "api_bench"
  use_cases: "drive the review endpoints against a starved bus"
}

scenario "SCN-001" {
  description: "sustained load on the narrow diagnostics link"
}

service "svc.diag" {
  functions: fn_diag
  buses: bus_diag
}

bus "bus_diag" {
  capacity: 1000 bit/s
  base_latency: 0 s
}

failure_mode "FM-001" {
  function: fn_diag
  mechanism: "diagnostics stream stalls under contention"
  effect: degradation
  method: expert_judgment
}
"""

HZ = parse_unit("Hz")
BIT = parse_unit("bit")
S = parse_unit("s")
ONE = parse_unit("1")


def _bench_pi(pi_id: str) -> PerformanceIndicator:
    # 96-bit frames at 10 Hz: one rider fits the bench bus, two overload it.
    return PerformanceIndicator(
        id=pi_id,
        description="bench indicator with fully declared transport needs",
        unit=ONE,
        range=ValueRange(Quantity(0.0, ONE), Quantity(1.0, ONE)),
        perspective=Perspective.BOTTOM_UP,
        proposed_by=(Attribution(Role.FUNCTION_EXPERT, "Jonas Weber"),),
        provider="fn_diag",
        rate=Quantity(10.0, HZ),
        payload=Quantity(32.0, BIT),
        freshness=Quantity(0.5, S),
        traces=frozenset({"FM-001"}),
        uncertainty=UncertaintySpec(UncertaintyKind.INTERVAL, magnitude=0.01),
    )


def _conflicted_state():
    result = parse_pid_text(NARROW_BUS_ITEM)
    assert result.ok, [d.code for d in result.diagnostics]
    state = init_process(result.bundle, COORDINATOR, CLOCK)
    state = submit_perspective(state, Perspective.TOP_DOWN, [], SAFETY, CLOCK)
    state = submit_perspective(
        state,
        Perspective.BOTTOM_UP,
        [_bench_pi("diag.load"), _bench_pi("diag.lag")],
        EXPERT,
        CLOCK,
    )
    state = run_harmonization(state, [], CLOCK)
    state = run_interface_definition(state, ARCHITECT, CLOCK)
    assert state.phase is Phase.CONFLICT_RESOLUTION
    return state


def _request(server, method: str, path: str, body=None):
    data = json.dumps(body).encode("utf-8") if body is not None else None
    request = urllib.request.Request(
        server.base_url + path, data=data, method=method
    )
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, response.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def _get(server, path: str):
    status, raw = _request(server, "GET", path)
    return status, json.loads(raw)


def _post(server, path: str, body):
    status, raw = _request(server, "POST", path, body)
    return status, json.loads(raw)


def _serve_stage(tmp_path, stage: str, **kwargs):
    save_project(drive_crosswalk(stage), tmp_path)
    return serve(tmp_path, clock=CLOCK, **kwargs)


@pytest.fixture
def defined_server(tmp_path):
    server = _serve_stage(tmp_path, "defined")
    yield server
    server.stop()


@pytest.fixture
def draft_server(tmp_path):
    server = _serve_stage(tmp_path, "draft")
    yield server
    server.stop()


@pytest.fixture
def conflicted_server(tmp_path):
    save_project(_conflicted_state(), tmp_path)
    server = serve(tmp_path, clock=CLOCK)
    yield server
    server.stop()


# Reads -------------------------------------------------------------------

def test_version_names_the_service(defined_server):
    status, doc = _get(defined_server, "/api/version")
    assert status == 200
    assert doc["name"] == "piforge"
    assert doc["schema"]
    assert doc["digest"] == defined_server.state.current_digest
    assert doc["read_only"] is False


GET_ENDPOINTS = (
    "/api/version",
    "/api/pilog",
    "/api/proposals",
    "/api/conflicts",
    "/api/graph",
    "/api/coverage",
    "/api/icd",
    "/api/proreq",
    "/api/process/state",
    "/api/trace/perception.misdetection_proxy",
)


@pytest.mark.parametrize("path", GET_ENDPOINTS)
def test_every_read_carries_the_digest(defined_server, path):
    status, doc = _get(defined_server, path)
    assert status == 200
    assert doc["digest"] == defined_server.state.current_digest


@pytest.mark.parametrize("path", GET_ENDPOINTS)
def test_repeated_reads_are_byte_identical(defined_server, path):
    _, first = _request(defined_server, "GET", path)
    _, second = _request(defined_server, "GET", path)
    assert first == second
    canonical = json.dumps(
        json.loads(first), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    assert first == canonical


def test_pilog_lists_the_consolidated_log(defined_server):
    _, doc = _get(defined_server, "/api/pilog")
    assert len(doc["pis"]) == 7
    ids = [p["id"] for p in doc["pis"]]
    assert ids == sorted(ids)


def test_trace_of_unknown_node_is_404(defined_server):
    status, doc = _get(defined_server, "/api/trace/no.such.node")
    assert status == 404
    assert doc["code"] == "unknown_entity"
    assert doc["digest"] == defined_server.state.current_digest


def test_unknown_endpoint_is_404(defined_server):
    status, doc = _get(defined_server, "/api/not/a/thing")
    assert status == 404
    assert doc["code"] == "unknown_endpoint"
    status, doc = _post(defined_server, "/api/not/a/thing", {})
    assert status == 404
    assert doc["code"] == "unknown_endpoint"


# Decisions ---------------------------------------------------------------

def _decision_body(digest: str, **overrides) -> dict:
    body = {
        "verdict": "merge",
        "rationale": "one sensor chain measures one platform temperature",
        "decided_by": COORDINATOR_DOC,
        "digest": digest,
    }
    body.update(overrides)
    return body


def test_decision_merges_and_advances_to_interfaces(draft_server, tmp_path):
    _, proposals = _get(draft_server, "/api/proposals")
    assert [p["id"] for p in proposals["proposals"]] == [MERGE_PROPOSAL]

    status, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body(proposals["digest"]),
    )
    assert status == 200
    assert doc["phase"] == "interfaces_defined"
    assert doc["open_conflicts"] == 0
    assert len(doc["interfaces"]) == 7


def test_mutation_is_persisted_before_the_response(draft_server, tmp_path):
    _, before = _get(draft_server, "/api/process/state")
    _, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body(before["digest"]),
    )
    reloaded = load_project(tmp_path)
    assert reloaded.current_digest == doc["digest"]
    assert reloaded.phase is Phase.INTERFACES_DEFINED
    assert (tmp_path / "icd.txt").exists()


def test_stale_decision_digest_is_409(draft_server):
    status, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body("f" * 64),
    )
    assert status == 409
    assert doc["code"] == "stale_digest"
    assert doc["digest"] == draft_server.state.current_digest


def test_decision_by_wrong_role_is_403(draft_server):
    digest = draft_server.state.current_digest
    status, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body(
            digest, decided_by={"role": "safety_engineer", "name": "Mara Ellis"}
        ),
    )
    assert status == 403
    assert doc["code"] == "role_violation"


def test_decision_on_unknown_proposal_is_404(draft_server):
    digest = draft_server.state.current_digest
    status, doc = _post(
        draft_server,
        "/api/proposals/MP-00000000/decision",
        _decision_body(digest),
    )
    assert status == 404
    assert doc["code"] == "unknown_entity"


@pytest.mark.parametrize(
    "mangle",
    [
        {"verdict": "maybe"},
        {"rationale": "   "},
        {"decided_by": "Alex Chen"},
        {"decided_by": {"role": "janitor", "name": "Alex Chen"}},
        {"decided_by": {"role": "self_perception_coordinator", "name": ""}},
    ],
)
def test_malformed_decision_is_400(draft_server, mangle):
    digest = draft_server.state.current_digest
    status, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body(digest, **mangle),
    )
    assert status == 400
    assert doc["code"] == "invalid_request"
    assert draft_server.state.current_digest == digest


def test_decision_outside_harmonization_is_400(defined_server):
    status, doc = _post(
        defined_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        _decision_body(defined_server.state.current_digest),
    )
    assert status == 400
    assert doc["code"] == "invalid_request"


def test_unparseable_body_is_400(draft_server):
    status, raw = _request(
        draft_server,
        "POST",
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
    )
    # empty body decodes to {}, which then fails verdict validation
    assert status == 400
    request = urllib.request.Request(
        draft_server.base_url + f"/api/proposals/{MERGE_PROPOSAL}/decision",
        data=b"not json at all",
        method="POST",
    )
    with pytest.raises(urllib.error.HTTPError) as excinfo:
        urllib.request.urlopen(request, timeout=10)
    assert excinfo.value.code == 400


def test_array_body_is_400(draft_server):
    status, doc = _post(
        draft_server,
        f"/api/proposals/{MERGE_PROPOSAL}/decision",
        ["verdict", "merge"],
    )
    assert status == 400
    assert doc["message"] == "body must be a JSON object"


# Resolutions -------------------------------------------------------------

def _resolution_body(digest: str, **overrides) -> dict:
    body = {
        "digest": digest,
        "kind": "adjust_pi",
        "actors": RESOLUTION_ACTORS,
        "rationale": "halved the rate keeps the stream within budget",
        "new_rate_hz": 5,
    }
    body.update(overrides)
    return body


def test_resolutions_drain_the_queue_then_synthesis_reruns(
    conflicted_server, tmp_path
):
    _, doc = _get(conflicted_server, "/api/conflicts")
    assert [c["id"] for c in doc["conflicts"]] == ["C-diag.lag", "C-diag.load"]

    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-diag.lag/resolution",
        _resolution_body(doc["digest"]),
    )
    assert status == 200
    assert doc["phase"] == "conflict_resolution"
    assert doc["open_conflicts"] == 1

    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-diag.load/resolution",
        _resolution_body(doc["digest"]),
    )
    assert status == 200
    assert doc["phase"] == "interfaces_defined"
    assert doc["open_conflicts"] == 0
    rates = {i["pi"]: i["rate_hz"] for i in doc["interfaces"]}
    assert rates == {"diag.lag": 5.0, "diag.load": 5.0}
    assert load_project(tmp_path).phase is Phase.INTERFACES_DEFINED


def test_stale_resolution_digest_is_409(conflicted_server):
    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-diag.lag/resolution",
        _resolution_body("e" * 64),
    )
    assert status == 409
    assert doc["code"] == "stale_digest"
    assert doc["digest"] == conflicted_server.state.current_digest


def test_resolution_of_unknown_conflict_is_404(conflicted_server):
    digest = conflicted_server.state.current_digest
    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-nope/resolution",
        _resolution_body(digest),
    )
    assert status == 404
    assert doc["code"] == "unknown_entity"


@pytest.mark.parametrize(
    "mangle",
    [
        {"kind": "wish_away"},
        {"actors": []},
        {"actors": "Alex Chen"},
        {"actors": [COORDINATOR_DOC]},
        {"rationale": ""},
        {"new_rate_hz": None},
    ],
)
def test_malformed_resolution_is_rejected(conflicted_server, mangle):
    digest = conflicted_server.state.current_digest
    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-diag.lag/resolution",
        _resolution_body(digest, **mangle),
    )
    assert status in (400, 403)
    assert conflicted_server.state.current_digest == digest


def test_resolution_missing_a_signing_role_is_403(conflicted_server):
    digest = conflicted_server.state.current_digest
    status, doc = _post(
        conflicted_server,
        "/api/conflicts/C-diag.lag/resolution",
        _resolution_body(digest, actors=[ARCHITECT_DOC]),
    )
    assert status == 403
    assert doc["code"] == "role_violation"


# Server lifecycle --------------------------------------------------------

def test_read_only_server_refuses_mutations(tmp_path):
    server = _serve_stage(tmp_path, "draft", read_only=True)
    try:
        status, doc = _get(server, "/api/version")
        assert status == 200
        assert doc["read_only"] is True
        status, doc = _get(server, "/api/pilog")
        assert status == 200
        status, doc = _post(
            server,
            f"/api/proposals/{MERGE_PROPOSAL}/decision",
            _decision_body(server.state.current_digest),
        )
        assert status == 403
        assert doc["code"] == "read_only"
        assert server.state.phase is Phase.PI_LOG_DRAFT
    finally:
        server.stop()


def test_occupied_port_raises(tmp_path):
    save_project(drive_crosswalk("init"), tmp_path)
    blocker = socket.socket()
    try:
        blocker.bind(("127.0.0.1", 0))
        taken = blocker.getsockname()[1]
        with pytest.raises(PortUnavailable):
            serve(tmp_path, port=taken, clock=CLOCK)
    finally:
        blocker.close()


def test_serving_an_empty_directory_fails_before_binding(tmp_path):
    with pytest.raises(UninitializedProject):
        serve(tmp_path, clock=CLOCK)


# Workbench assets ---------------------------------------------------------

INDEX_HTML = b"<!doctype html><title>workbench</title><div id=\"app\"></div>"
APP_JS = b"export const ready = true;\n"


@pytest.fixture
def asset_server(tmp_path):
    project = tmp_path / "project"
    save_project(drive_crosswalk("defined"), project)
    static = tmp_path / "dist"
    (static / "assets").mkdir(parents=True)
    (static / "index.html").write_bytes(INDEX_HTML)
    (static / "assets" / "app.js").write_bytes(APP_JS)
    server = serve(project, clock=CLOCK, static_dir=static)
    yield server
    server.stop()


def test_root_serves_the_workbench_index(asset_server):
    status, raw = _request(asset_server, "GET", "/")
    assert status == 200
    assert raw == INDEX_HTML


def test_nested_asset_is_served_with_its_content_type(asset_server):
    request = urllib.request.Request(asset_server.base_url + "/assets/app.js")
    with urllib.request.urlopen(request, timeout=10) as response:
        assert response.status == 200
        assert response.read() == APP_JS
        assert response.headers["Content-Type"].startswith("application/javascript")


def test_api_paths_stay_json_when_assets_are_mounted(asset_server):
    status, doc = _get(asset_server, "/api/version")
    assert status == 200
    assert doc["name"] == "piforge"
    status, doc = _get(asset_server, "/api/nonexistent")
    assert status == 404
    assert doc["code"] == "unknown_endpoint"


def test_missing_asset_is_a_404(asset_server):
    status, doc = _get(asset_server, "/assets/missing.js")
    assert status == 404
    assert doc["code"] == "unknown_endpoint"


def test_asset_paths_cannot_escape_the_static_root(asset_server):
    # Raw request: urllib would collapse the dotted segments client-side.
    connection = http.client.HTTPConnection("127.0.0.1", asset_server.port, timeout=10)
    try:
        connection.request("GET", "/../project/bundle.pid")
        response = connection.getresponse()
        body = response.read()
        assert response.status == 404
        assert b"pi " not in body
    finally:
        connection.close()


def test_without_assets_the_root_stays_unknown(defined_server):
    status, doc = _get(defined_server, "/")
    assert status == 404
    assert doc["code"] == "unknown_endpoint"
