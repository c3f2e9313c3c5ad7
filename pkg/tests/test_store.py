"""Project directory persistence: round-trips and tamper detection."""

from __future__ import annotations

import pytest

from conftest import CLOCK, drive_crosswalk
from piforge.errors import DigestMismatch, UninitializedProject
from piforge.store import (
    AUDIT_FILE,
    BUNDLE_FILE,
    DECISIONS_FILE,
    ICD_FILE,
    IDL_FILE,
    STATE_FILE,
    load_project,
    save_project,
)

STAGES = ("init", "analysis", "draft", "harmonized", "defined")


@pytest.mark.parametrize("stage", STAGES)
def test_round_trip_at_every_stage(tmp_path, stage):
    state = drive_crosswalk(stop=stage)
    save_project(state, tmp_path)
    loaded = load_project(tmp_path)
    assert loaded.phase is state.phase
    assert loaded.current_digest == state.current_digest
    assert loaded.bundle == state.bundle
    assert loaded.top_down_done == state.top_down_done
    assert loaded.bottom_up_done == state.bottom_up_done
    assert loaded.harmonization_iteration == state.harmonization_iteration
    assert loaded.threshold == state.threshold
    assert loaded.warn_utilization == state.warn_utilization
    assert loaded.suppressions == state.suppressions
    assert loaded.decisions == state.decisions
    assert loaded.conflicts == state.conflicts
    assert loaded.interfaces == state.interfaces
    assert loaded.icd_text == state.icd_text
    assert loaded.idl_text == state.idl_text
    assert loaded.audit == state.audit


def test_save_is_byte_stable(tmp_path):
    state = drive_crosswalk()
    a, b = tmp_path / "a", tmp_path / "b"
    save_project(state, a)
    save_project(load_project(a), b)
    for name in (BUNDLE_FILE, STATE_FILE, DECISIONS_FILE, AUDIT_FILE, ICD_FILE, IDL_FILE):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_documents_written_only_when_present(tmp_path):
    save_project(drive_crosswalk(stop="draft"), tmp_path)
    assert not (tmp_path / ICD_FILE).exists()
    assert not (tmp_path / IDL_FILE).exists()
    save_project(drive_crosswalk(), tmp_path)
    assert (tmp_path / ICD_FILE).is_file()
    assert (tmp_path / IDL_FILE).is_file()


def test_missing_project_rejected(tmp_path):
    with pytest.raises(UninitializedProject):
        load_project(tmp_path / "nowhere")


def test_edited_bundle_breaks_integrity(tmp_path):
    save_project(drive_crosswalk(), tmp_path)
    bundle_path = tmp_path / BUNDLE_FILE
    text = bundle_path.read_text(encoding="utf-8")
    bundle_path.write_text(
        text.replace("[-40.0, 105.0]", "[-40.0, 200.0]"), encoding="utf-8"
    )
    with pytest.raises(DigestMismatch):
        load_project(tmp_path)


def test_unparseable_bundle_rejected(tmp_path):
    save_project(drive_crosswalk(), tmp_path)
    (tmp_path / BUNDLE_FILE).write_text("pi \"broken {\n", encoding="utf-8")
    with pytest.raises(DigestMismatch):
        load_project(tmp_path)


def test_malformed_audit_line_rejected(tmp_path):
    save_project(drive_crosswalk(), tmp_path)
    audit_path = tmp_path / AUDIT_FILE
    audit_path.write_text(
        audit_path.read_text(encoding="utf-8") + "not\ta\tvalid\tline\n",
        encoding="utf-8",
    )
    with pytest.raises(DigestMismatch):
        load_project(tmp_path)


def test_corrupted_decisions_rejected(tmp_path):
    save_project(drive_crosswalk(), tmp_path)
    (tmp_path / DECISIONS_FILE).write_text(
        '# decisions v1\ndecision "D-001" {\n  verdict: maybe\n}\n',
        encoding="utf-8",
    )
    with pytest.raises(DigestMismatch):
        load_project(tmp_path)


def test_loaded_state_keeps_working(tmp_path):
    from piforge.engine import Phase, run_interface_definition
    from conftest import ARCHITECT

    state = drive_crosswalk(stop="harmonized")
    save_project(state, tmp_path)
    resumed = run_interface_definition(load_project(tmp_path), ARCHITECT, CLOCK)
    assert resumed.phase is Phase.INTERFACES_DEFINED
    assert resumed.icd_text == drive_crosswalk().icd_text
