"""Ricci flow of rotationally symmetric metrics, reduced to (w, psi).

At a fixed grid coordinate x the flow reads

    d/dt w   = w_ss - (n - 2) K1 w      ( = -mu w )
    d/dt psi = -(n - 1) K0 psi          ( = -lambda psi )

Grid points are material, so time derivatives of stored fields at fixed x
are genuine time derivatives along the flow.  Sphere topology holds w = 0
at the poles; neck topology reflects w and psi evenly at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import ScenarioConfig
from .errors import (
    InsufficientSnapshots,
    InvalidProfileParameters,
    NumericalBlowup,
    RicciLabError,
    SphereExtinct,
)
from .geometry import (
    CurvatureSample,
    Grid,
    Topology,
    WarpedState,
    curvature_sample,
    laplacian_radial,
    profile_terms,
    smoothstep,
)

STOP_TIME = "time_reached"
STOP_PINCH = "pinch_detected"
STOP_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class StepControl:
    sigma_cfl: float = 0.2
    dt_min: float = 1e-14
    dt_max: float = 1e-2
    snapshot_every: int = 64

    def __post_init__(self):
        if not 0 < self.sigma_cfl <= 0.5:
            raise ValueError("sigma_cfl must lie in (0, 0.5]")
        if self.dt_min > self.dt_max:
            raise ValueError("dt_min must not exceed dt_max")

    def dt(self, state: WarpedState) -> float:
        raw = self.sigma_cfl * (float(np.min(state.psi)) * state.grid.dx) ** 2
        return min(max(raw, self.dt_min), self.dt_max)


@dataclass(frozen=True, eq=False)
class FlowHistory:
    snapshots: tuple[tuple[WarpedState, CurvatureSample], ...]
    scenario: ScenarioConfig | None
    stop_reason: str = STOP_TIME
    K_bar: float = field(init=False)
    Lambda0: float = field(init=False)
    T_end: float = field(init=False)

    def __post_init__(self):
        if not self.snapshots:
            object.__setattr__(self, "K_bar", float("nan"))
            object.__setattr__(self, "Lambda0", float("nan"))
            object.__setattr__(self, "T_end", float("nan"))
            return
        times = [s.t for s, _ in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        k_bar = max(float(np.max(c.ric_norm)) for _, c in self.snapshots)
        object.__setattr__(self, "K_bar", k_bar)
        object.__setattr__(self, "Lambda0", float(np.max(self.snapshots[0][1].rm_norm)))
        object.__setattr__(self, "T_end", float(times[-1]))

    @classmethod
    def from_states(cls, states, scenario=None, stop_reason=STOP_TIME) -> "FlowHistory":
        return cls(tuple((s, curvature_sample(s)) for s in states), scenario, stop_reason)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s, _ in self.snapshots])

    @property
    def states(self) -> list[WarpedState]:
        return [s for s, _ in self.snapshots]

    @property
    def samples(self) -> list[CurvatureSample]:
        return [c for _, c in self.snapshots]

    def __len__(self):
        return len(self.snapshots)


# ---------------------------------------------------------------------------
# initial data


def init_scenario(config: ScenarioConfig) -> WarpedState:
    grid = Grid(config.nodes)
    x = grid.x
    r0 = config.r0
    if config.profile == "sphere":
        return _round(grid, config.n, r0, 0.0)
    if config.profile == "dumbbell":
        amp, width = config.neck_amp, config.neck_width
        if not 0 <= amp < 1 or width <= 0:
            raise InvalidProfileParameters(f"need 0 <= neck_amp < 1 and neck_width > 0, got {amp}, {width}")
        dent = 1 - amp * np.exp(-((x - 0.5) ** 2) / width**2)
        # scale so |w_s| = 1 at the poles (the dent factor is symmetric)
        w = r0 * np.sin(np.pi * x) * dent / dent[0]
        w[0] = w[-1] = 0.0
        return WarpedState(grid, config.n, 0.0, np.full(grid.nodes, np.pi * r0), w, Topology.SPHERE)
    if config.profile == "cylinder_caps":
        amp, width = config.neck_amp, config.neck_width
        if not 0 <= amp < 1 or not 0 < width < 0.5:
            raise InvalidProfileParameters(f"need 0 <= neck_amp < 1 and 0 < neck_width < 0.5, got {amp}, {width}")
        # bulges of relative height amp at both ends, flat (w_s = 0) at the ends
        bump = (1 - smoothstep(x / width)) + (1 - smoothstep((1 - x) / width))
        w = r0 * (1 + amp * bump)
        return WarpedState(grid, config.n, 0.0, np.full(grid.nodes, 2 * np.pi * r0), w, Topology.NECK)
    raise InvalidProfileParameters(f"unknown profile {config.profile!r}")


def _round(grid: Grid, n: int, r: float, t: float) -> WarpedState:
    w = r * np.sin(np.pi * grid.x)
    w[0] = w[-1] = 0.0
    return WarpedState(grid, n, t, np.full(grid.nodes, np.pi * r), w, Topology.SPHERE)


def extinction_time(n: int, r0: float) -> float:
    return r0 * r0 / (2 * (n - 1))


def exact_sphere(n: int, r0: float, t: float, grid: Grid | None = None) -> WarpedState:
    """Shrinking round sphere r(t) = sqrt(r0^2 - 2(n-1)t)."""
    if t >= extinction_time(n, r0):
        raise SphereExtinct(f"round sphere of radius {r0} is extinct at t = {extinction_time(n, r0)}")
    return _round(grid or Grid(400), n, float(np.sqrt(r0 * r0 - 2 * (n - 1) * t)), t)


def exact_cylinder_radius(n: int, rho: float, t: float) -> float:
    return float(np.sqrt(rho * rho - 2 * (n - 2) * t))


# ---------------------------------------------------------------------------
# stepping


def velocity(state: WarpedState, w: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side (dw/dt, dpsi/dt) at fixed x."""
    n = state.n
    terms = profile_terms(w, psi, state.grid.dx, state.grid.x, state.topology, neck_rule="even")
    wt = terms.w_ss - (n - 2) * terms.K1 * w
    if state.topology is Topology.SPHERE:
        wt[0] = wt[-1] = 0.0
    pt = -(n - 1) * terms.K0 * psi
    return wt, pt


def _blend(grid: Grid) -> np.ndarray:
    return smoothstep((grid.x - 0.25) / 0.5)


def step(state: WarpedState, dt: float) -> WarpedState:
    """One classical RK4 step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    size = state.grid.nodes
    w, psi = np.empty(size), np.empty(size)
    ok = _kernels.rk4_into(
        state.w, state.psi, float(dt), state.grid.dx, _blend(state.grid),
        state.topology is Topology.SPHERE, state.n, w, psi, _kernels.make_buffers(size),
    )
    if not ok:
        raise NumericalBlowup(f"non-finite values or psi <= 0 after step at t = {state.t}")
    return state.replace(t=state.t + dt, w=w, psi=psi)


def pinch_width(state: WarpedState) -> float:
    """min(max w, smallest strict interior local minimum of w)."""
    w = state.w
    inner = w[1:-1]
    minima = inner[(inner < w[:-2]) & (inner < w[2:])]
    width = float(np.max(w))
    if minima.size:
        width = min(width, float(np.min(minima)))
    return width


def control_from(config: ScenarioConfig) -> StepControl:
    return StepControl(config.sigma_cfl, config.dt_min, config.dt_max, config.snapshot_every)


def run(config: ScenarioConfig, state: WarpedState | None = None) -> FlowHistory:
    """Integrate from the scenario's initial data until t_end, pinch or failure."""
    control = control_from(config)
    state = init_scenario(config) if state is None else state
    snaps = [(state, curvature_sample(state))]
    w, psi, t = state.w.copy(), state.psi.copy(), float(state.t)
    size = state.grid.nodes
    buf = _kernels.make_buffers(size)
    w_new, p_new = np.empty(size), np.empty(size)
    args = (
        state.n, state.grid.dx, _blend(state.grid), state.topology is Topology.SPHERE,
        control.sigma_cfl, control.dt_min, control.dt_max, float(config.t_end),
        1e-12 * max(1.0, config.t_end), config.pinch_epsilon * config.r0,
    )
    reason = None
    while reason is None:
        t, taken, status = _kernels.advance(w, psi, t, *args, control.snapshot_every, buf, w_new, p_new)
        if status == _kernels.STATUS_BLOWUP:
            reason = STOP_FAILURE
            if taken == 0:
                break
        elif status == _kernels.STATUS_PINCH:
            reason = STOP_PINCH
        elif status == _kernels.STATUS_TIME:
            reason = STOP_TIME
        current = state.replace(t=t, w=w.copy(), psi=psi.copy())
        try:
            snaps.append((current, curvature_sample(current)))
        except RicciLabError:
            reason = STOP_FAILURE
    return FlowHistory(tuple(snaps), config, reason)


# ---------------------------------------------------------------------------
# residual of the scalar-curvature evolution equation


@dataclass(frozen=True)
class ResidualStats:
    times: np.ndarray  # interior snapshot times
    max: np.ndarray  # per snapshot
    median: np.ndarray  # per snapshot
    overall_max: float
    overall_median: float
    per_node: tuple[np.ndarray, ...]


def time_derivative(times, values, k: int) -> np.ndarray:
    """Second-order three-point derivative at snapshot k (uneven spacing)."""
    t0, t1, t2 = times[k - 1], times[k], times[k + 1]
    d1, d2 = t1 - t0, t2 - t1
    return (
        -d2 / (d1 * (d1 + d2)) * values[k - 1]
        + (d2 - d1) / (d1 * d2) * values[k]
        + d1 / (d2 * (d1 + d2)) * values[k + 1]
    )


def evolution_residuals(history: FlowHistory) -> ResidualStats:
    """Normalized residual of dR/dt = Laplacian R + 2|Ric|^2 at interior snapshots."""
    if len(history) < 3:
        raise InsufficientSnapshots("need at least three snapshots")
    times = history.times
    Rs = [c.R for c in history.samples]
    maxes, medians, per_node = [], [], []
    for k in range(1, len(history) - 1):
        state, sample = history.snapshots[k]
        R_t = time_derivative(times, Rs, k)
        res = R_t - laplacian_radial(state, sample.R, sample) - 2 * sample.ric_norm**2
        rel = np.abs(res) / max(1.0, float(np.max(np.abs(R_t))))
        per_node.append(rel)
        maxes.append(float(np.max(rel)))
        medians.append(float(np.median(rel)))
    allv = np.concatenate(per_node)
    return ResidualStats(
        times=times[1:-1],
        max=np.array(maxes),
        median=np.array(medians),
        overall_max=float(np.max(allv)),
        overall_median=float(np.median(allv)),
        per_node=tuple(per_node),
    )
