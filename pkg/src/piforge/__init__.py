"""Specification compiler and traceability toolkit for PI interfaces.

The pipeline runs item definition -> two-branch analysis -> harmonization
-> interface synthesis, with every artifact anchored to a canonical
bundle digest and every privileged action audited against a role table.
"""

from .canonical import canonicalize_bundle, serialize_bundle, snapshot_hash
from .engine import (
    Phase,
    ProcessState,
    Resolution,
    ResolutionKind,
    fixed_clock,
    init_process,
    proreq_checklist,
    resolve_conflict,
    run_harmonization,
    run_interface_definition,
    submit_perspective,
)
from .errors import PiforgeError
from .graph import build_graph, coverage_report, impact, trace_origin
from .harmonize import apply_decisions, propose_merges, similarity
from .model import (
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
    UncertaintySpec,
    ValueRange,
    validate_pi,
)
from .pid import Decision, Verdict, parse_pid, parse_pid_text
from .store import load_project, save_project
from .synth import allocate, check_feasibility, choose_encoding, emit_icd, emit_idl
from .units import Quantity, canonical_unit, convert, parse_unit, render_unit

__all__ = [
    "ArchitectureModel",
    "Attribution",
    "Bus",
    "Decision",
    "FailureMode",
    "ItemBundle",
    "ItemDefinition",
    "PerformanceIndicator",
    "Perspective",
    "Phase",
    "PiforgeError",
    "ProcessState",
    "Quantity",
    "Resolution",
    "ResolutionKind",
    "Role",
    "SafetyRequirement",
    "Scenario",
    "Service",
    "UncertaintySpec",
    "ValueRange",
    "Verdict",
    "allocate",
    "apply_decisions",
    "build_graph",
    "canonical_unit",
    "canonicalize_bundle",
    "check_feasibility",
    "choose_encoding",
    "convert",
    "coverage_report",
    "emit_icd",
    "emit_idl",
    "fixed_clock",
    "impact",
    "init_process",
    "load_project",
    "parse_pid",
    "parse_pid_text",
    "parse_unit",
    "propose_merges",
    "proreq_checklist",
    "render_unit",
    "resolve_conflict",
    "run_harmonization",
    "run_interface_definition",
    "save_project",
    "serialize_bundle",
    "similarity",
    "snapshot_hash",
    "submit_perspective",
    "trace_origin",
    "validate_pi",
]

__version__ = "0.1.0"
