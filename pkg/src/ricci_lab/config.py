"""Flat ``key = value`` scenario configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from .errors import ParseError, RangeError

TOPOLOGIES = ("sphere", "neck")
PROFILES = ("sphere", "dumbbell", "cylinder_caps")
H_KINDS = ("linear", "sine")
PICK_MODES = ("global", "local")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    topology: str = "sphere"
    n: int = 3
    nodes: int = 400  # number of grid intervals N; the grid has N + 1 nodes
    r0: float = 1.0
    profile: str = "sphere"
    neck_amp: float = 0.3
    neck_width: float = 0.1
    t_end: float = 0.2
    # step control
    sigma_cfl: float = 0.2
    dt_min: float = 1e-14
    dt_max: float = 1e-2
    snapshot_every: int = 64
    pinch_epsilon: float = 1e-2
    # monitors
    alpha: float = 1.0
    beta: float = 1.0
    eta: float = 1.0
    delta: float = 1e-3
    m: float = 2.0
    h_kind: str = "linear"
    # point picking
    pick_alpha: float = 1e-3
    pick_epsilon: float = 0.25
    pick_mode: str = "global"
    # barrier machinery
    theta1: float = 0.5
    cutoff_r: float = 0.5
    B_const: float | None = None  # None: derived from the measured C1

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _positive(cfg, *keys):
    for k in keys:
        if not getattr(cfg, k) > 0:
            raise RangeError(k, f"must be positive, got {getattr(cfg, k)!r}")


def validate(cfg: ScenarioConfig) -> None:
    if not cfg.name or any(c.isspace() or c in "/\\" for c in cfg.name):
        raise RangeError("name", "must be a non-empty identifier without spaces or slashes")
    if cfg.topology not in TOPOLOGIES:
        raise RangeError("topology", f"must be one of {TOPOLOGIES}")
    if cfg.profile not in PROFILES:
        raise RangeError("profile", f"must be one of {PROFILES}")
    expected = "neck" if cfg.profile == "cylinder_caps" else "sphere"
    if cfg.topology != expected:
        raise RangeError("profile", f"profile {cfg.profile} needs topology {expected}")
    if cfg.n < 2:
        raise RangeError("n", "dimension must be >= 2")
    if cfg.nodes < 64:
        raise RangeError("nodes", "grid needs at least 64 intervals")
    if cfg.snapshot_every < 1:
        raise RangeError("snapshot_every", "must be >= 1")
    _positive(cfg, "r0", "t_end", "dt_min", "dt_max", "pinch_epsilon", "neck_width")
    _positive(cfg, "alpha", "beta", "eta", "delta", "m", "pick_alpha", "pick_epsilon", "cutoff_r")
    if not 0 < cfg.sigma_cfl <= 0.5:
        raise RangeError("sigma_cfl", "must lie in (0, 0.5]")
    if cfg.dt_min > cfg.dt_max:
        raise RangeError("dt_min", "must not exceed dt_max")
    if not 0 <= cfg.neck_amp < 1:
        raise RangeError("neck_amp", "must lie in [0, 1)")
    if cfg.m < 1:
        raise RangeError("m", "must be >= 1")
    if cfg.h_kind not in H_KINDS:
        raise RangeError("h_kind", f"must be one of {H_KINDS}")
    if cfg.pick_mode not in PICK_MODES:
        raise RangeError("pick_mode", f"must be one of {PICK_MODES}")
    if not 0 < cfg.theta1 < 1:
        raise RangeError("theta1", "must lie in (0, 1)")
    if cfg.B_const is not None and not cfg.B_const > 0:
        raise RangeError("B_const", "must be positive or auto")


def _convert(key: str, raw: str, line: int):
    f = _FIELDS[key]
    kind = f.type
    try:
        if key == "B_const":
            return None if raw.lower() == "auto" else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ParseError(f"cannot read {key} from {raw!r}", line) from None


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", lineno)
        key, raw = (p.strip() for p in body.split("=", 1))
        if key not in _FIELDS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not raw:
            raise ParseError(f"missing value for {key!r}", lineno)
        values[key] = _convert(key, raw, lineno)
    return ScenarioConfig(**values)


def format_config(cfg: ScenarioConfig) -> str:
    """Inverse of parse_config; floats use repr so they round-trip exactly."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            text = "auto"
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
