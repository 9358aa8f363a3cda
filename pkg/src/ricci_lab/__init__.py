"""Numerical laboratory for Ricci flow of rotationally symmetric metrics."""

from .config import ScenarioConfig, format_config, parse_config
from .decomposition import check_identities, decompose, decomposition_constants, rot_sym_bianchi_check
from .flow import FlowHistory, exact_sphere, init_scenario, run
from .geometry import Grid, Topology, WarpedState, curvature_sample
from .monitors import MonitorParams, summary, validate_h
from .picking import PickParams, QField, pick_point, verify_pick
from .scenario import RunReport, run_scenario

__all__ = [
    "FlowHistory",
    "Grid",
    "MonitorParams",
    "PickParams",
    "QField",
    "RunReport",
    "ScenarioConfig",
    "Topology",
    "WarpedState",
    "check_identities",
    "curvature_sample",
    "decompose",
    "decomposition_constants",
    "exact_sphere",
    "format_config",
    "init_scenario",
    "parse_config",
    "pick_point",
    "rot_sym_bianchi_check",
    "run",
    "run_scenario",
    "summary",
    "validate_h",
    "verify_pick",
]
