"""Point picking for the blow-up argument.

Starting from a space-time point where Q = |nabla Ric| beats
alpha (K T / t)^{3/2}, repeatedly jump to a point of the backward
parabolic region (time window of length beta Q^{-2/3}) where Q is more
than eight times larger.  Q grows geometrically, so the walk ends after
finitely many jumps at a point that dominates its own region.

Fields are sampled: a time index k and a node index i stand for the
point (t_k, s_k[i]), where s_k is the arc-length position at time k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoViolation

GLOBAL = "global"
LOCAL = "local"
JUMP_FACTOR = 8.0


@dataclass(frozen=True, eq=False)
class QField:
    times: np.ndarray  # (K,)
    positions: np.ndarray  # (K, M), nondecreasing in M
    Q: np.ndarray  # (K, M), nonnegative
    K_bar: float
    T: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        if pos.shape != Q.shape or pos.shape[0] != times.size:
            raise ValueError("times, positions and Q disagree in shape")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must increase strictly")
        if np.any(np.diff(pos, axis=1) < 0):
            raise ValueError("positions must be nondecreasing along each row")
        if np.any(Q < 0) or not np.all(np.isfinite(Q)):
            raise ValueError("Q must be finite and nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "Q", Q)

    @property
    def lengths(self) -> np.ndarray:
        return self.positions[:, -1] - self.positions[:, 0]

    def position_of(self, k: int, u: float) -> float:
        """Arc-length position at time k of the material coordinate u in [0, 1]."""
        grid = np.linspace(0.0, 1.0, self.positions.shape[1])
        return float(np.interp(u, grid, self.positions[k]))

    @classmethod
    def from_history(cls, history, use_alt_norm: bool = False) -> "QField":
        """Q = |nabla Ric| on each stored snapshot."""
        pos, Q = [], []
        for state, c in history.snapshots:
            pos.append(state.arc_length)
            sq = c.nabla_ric_paper if use_alt_norm else c.nabla_ric_full
            Q.append(np.sqrt(np.nan_to_num(np.maximum(sq, 0.0))))
        return cls(history.times, np.array(pos), np.array(Q), history.K_bar, history.T_end)


@dataclass(frozen=True)
class PickParams:
    alpha: float = 1e-3
    eta: float = 1.0
    mode: str = GLOBAL
    epsilon: float = 0.25
    x0: float = 0.5  # material coordinate of the centre, local mode only
    start: tuple[int, int] | None = None

    def __post_init__(self):
        if self.mode not in (GLOBAL, LOCAL):
            raise ValueError(f"unknown pick mode {self.mode!r}")
        if not (self.alpha > 0 and self.eta > 0 and self.epsilon > 0):
            raise ValueError("alpha, eta and epsilon must be positive")
        if not 0.0 <= self.x0 <= 1.0:
            raise ValueError("x0 must lie in [0, 1]")

    @property
    def beta(self) -> float:
        scale = self.epsilon**2 if self.mode == LOCAL else 1.0
        return 0.5 * scale * self.alpha ** (2.0 / 3.0) * self.eta


@dataclass(frozen=True)
class PickResult:
    point: tuple[int, int]
    Q_bar: float
    t_bar: float
    window: tuple[float, float]  # [t_bar - beta Q_bar^{-2/3}, t_bar]
    radius: float | None  # ball radius in local mode
    iterations: int
    trace: tuple[tuple[int, int, float], ...]
    threshold_ok: bool
    dominated_ok: bool
    containment_ok: bool
    mode: str
    beta: float
    notes: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.threshold_ok and self.dominated_ok and self.containment_ok


def threshold(field_: QField, alpha: float, t: float) -> float:
    if t <= 0:
        return math.inf
    return alpha * (field_.K_bar * field_.T / t) ** 1.5


def _thresholds(field_: QField, alpha: float) -> np.ndarray:
    return np.array([threshold(field_, alpha, t) for t in field_.times])


def _center_distance(field_: QField, x0: float) -> np.ndarray:
    centres = np.array([field_.position_of(k, x0) for k in range(field_.times.size)])
    return np.abs(field_.positions - centres[:, None])


def _best(values: np.ndarray, mask: np.ndarray) -> tuple[int, int] | None:
    """Argmax over the mask; ties go to the latest time, then the smallest node."""
    if not np.any(mask):
        return None
    top = np.max(values[mask])
    ks, is_ = np.nonzero(mask & (values == top))
    k = int(np.max(ks))
    return k, int(np.min(is_[ks == k]))


def region_mask(field_: QField, k: int, i: int, beta: float, mode: str) -> tuple[float, float | None, np.ndarray]:
    """(t_lo, radius, mask) of the backward region attached to (k, i)."""
    Qk = field_.Q[k, i]
    t_k = field_.times[k]
    t_lo = float(t_k - beta * Qk ** (-2.0 / 3.0))
    in_window = (field_.times >= t_lo - 1e-15 * max(1.0, t_k)) & (field_.times <= t_k)
    mask = np.zeros(field_.Q.shape, dtype=bool)
    mask[in_window, :] = True
    radius = None
    if mode == LOCAL:
        radius = math.sqrt(beta) * Qk ** (-1.0 / 3.0)
        dist = np.abs(field_.positions - field_.positions[:, [i]])
        mask &= dist <= radius
    return t_lo, radius, mask


def as_field(source) -> QField:
    return source if isinstance(source, QField) else QField.from_history(source)


def pick_point(source, params: PickParams, max_iter: int = 10_000) -> PickResult:
    """Run the escalation on a QField or a FlowHistory."""
    field_ = as_field(source)
    beta = params.beta
    thr = _thresholds(field_, params.alpha)
    candidates = field_.Q > thr[:, None]
    if params.mode == LOCAL:
        candidates &= _center_distance(field_, params.x0) <= 2 * math.sqrt(field_.T)
    if params.start is not None:
        k, i = params.start
        if not candidates[k, i]:
            raise NoViolation(f"start point {params.start} does not exceed the threshold")
    else:
        ratio = np.where(candidates, field_.Q / np.where(np.isfinite(thr), thr, 1.0)[:, None], -1.0)
        best = _best(ratio, candidates)
        if best is None:
            raise NoViolation("Q never exceeds the threshold")
        k, i = best
    trace = [(k, i, float(field_.Q[k, i]))]
    for _ in range(max_iter):
        _, _, mask = region_mask(field_, k, i, beta, params.mode)
        jump = mask & (field_.Q > JUMP_FACTOR * field_.Q[k, i])
        nxt = _best(field_.Q, jump)
        if nxt is None:
            break
        k, i = nxt
        trace.append((k, i, float(field_.Q[k, i])))
    else:
        raise RuntimeError("point picking did not terminate")
    Q_bar = float(field_.Q[k, i])
    t_bar = float(field_.times[k])
    t_lo, radius, mask = region_mask(field_, k, i, beta, params.mode)
    notes = []
    threshold_ok = bool(Q_bar > thr[k])
    if field_.K_bar * field_.T < params.eta:
        notes.append("K_bar T < eta, the threshold bound is not guaranteed")
    dominated_ok = bool(np.all(field_.Q[mask] <= JUMP_FACTOR * Q_bar))
    containment_ok = t_lo > 0
    if params.mode == LOCAL:
        far = _center_distance(field_, params.x0)[mask]
        ball_in = np.all(field_.positions[mask.any(axis=1), i] - radius >= field_.positions[mask.any(axis=1), 0])
        ball_in &= np.all(field_.positions[mask.any(axis=1), i] + radius <= field_.positions[mask.any(axis=1), -1])
        containment_ok = containment_ok and bool(np.all(far <= 4 * math.sqrt(field_.T))) and bool(ball_in)
    return PickResult(
        point=(k, i),
        Q_bar=Q_bar,
        t_bar=t_bar,
        window=(t_lo, t_bar),
        radius=radius,
        iterations=len(trace) - 1,
        trace=tuple(trace),
        threshold_ok=threshold_ok,
        dominated_ok=dominated_ok,
        containment_ok=bool(containment_ok),
        mode=params.mode,
        beta=beta,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# independent check


@dataclass(frozen=True)
class PickVerification:
    value_ok: bool
    threshold_ok: bool
    dominated_ok: bool
    containment_ok: bool
    worst_ratio: float  # largest Q / Q_bar seen in the region

    @property
    def ok(self) -> bool:
        return self.value_ok and self.threshold_ok and self.dominated_ok and self.containment_ok


def verify_pick(source, result: PickResult, params: PickParams) -> PickVerification:
    """Brute-force recheck of a pick, one point at a time in plain Python."""
    field_ = as_field(source)
    k, i = result.point
    times = [float(t) for t in field_.times]
    Q = field_.Q.tolist()
    pos = field_.positions.tolist()
    M = len(pos[0])
    local = params.mode == LOCAL
    beta = 0.5 * params.alpha ** (2.0 / 3.0) * params.eta * (params.epsilon**2 if local else 1.0)

    # everything below judges the claimed values; value_ok ties them to the field
    value_ok = Q[k][i] == result.Q_bar and times[k] == result.t_bar
    t_bar, Q_bar = result.t_bar, result.Q_bar
    threshold_ok = t_bar > 0 and Q_bar > params.alpha * (field_.K_bar * field_.T / t_bar) ** 1.5

    t_lo = t_bar - beta * Q_bar ** (-2.0 / 3.0)
    radius = math.sqrt(beta) * Q_bar ** (-1.0 / 3.0)
    sqrt_T = math.sqrt(field_.T)
    worst = 0.0
    contained = t_lo > 0
    for j, tj in enumerate(times):
        if tj > t_bar or tj < t_lo - 1e-15 * max(1.0, t_bar):
            continue
        centre = None
        if local:
            # x0 sits at fraction x0 of the material grid
            u = params.x0 * (M - 1)
            lo = min(int(math.floor(u)), M - 2)
            frac = u - lo
            centre = pos[j][lo] * (1 - frac) + pos[j][lo + 1] * frac
            ball_lo, ball_hi = pos[j][i] - radius, pos[j][i] + radius
            if ball_lo < pos[j][0] or ball_hi > pos[j][M - 1]:
                contained = False
        for node in range(M):
            if local and abs(pos[j][node] - pos[j][i]) > radius:
                continue
            worst = max(worst, Q[j][node] / Q_bar)
            if local and abs(pos[j][node] - centre) > 4 * sqrt_T:
                contained = False
    return PickVerification(
        value_ok=bool(value_ok),
        threshold_ok=bool(threshold_ok),
        dominated_ok=worst <= JUMP_FACTOR,
        containment_ok=bool(contained),
        worst_ratio=worst,
    )


# ---------------------------------------------------------------------------
# synthetic fields


def synthetic_field(
    rng: np.random.Generator,
    times: int = 40,
    nodes: int = 121,
    T: float = 1.0,
    K_bar: float = 4.0,
    bumps: int = 6,
) -> QField:
    """Random smooth Q with a few sharp space-time bumps on a long domain.

    Q grows towards the final time so that the threshold is exceeded, and
    the nested bumps give the walk something to climb.  The domain has
    length ~10 sqrt(T) with positions drifting by up to 10% in time.
    """
    ts = np.linspace(T / times, T, times)
    u = np.linspace(0.0, 1.0, nodes)
    length = 10.0 * math.sqrt(T)
    stretch = 1.0 + 0.1 * rng.uniform(-1, 1) * ts / T
    # node spacing varies by +-10%, like a non-constant psi
    spacing = 1.0 + 0.1 * np.sin(2 * np.pi * 3 * (u[1:] + rng.uniform()))
    cells = np.concatenate([[0.0], np.cumsum(spacing)])
    pos = length * stretch[:, None] * (cells / cells[-1])[None, :]
    base = (K_bar * T / ts) ** 1.5
    Q = base[:, None] * rng.uniform(0.002, 0.02) * (1.0 + 0.3 * rng.uniform(size=(times, nodes)))
    for _ in range(bumps):
        kc = rng.uniform(0.3, 1.0) * T
        uc = rng.uniform(0.3, 0.7)
        height = 10.0 ** rng.uniform(0.5, 3.0)
        width_t = rng.uniform(0.02, 0.2) * T
        width_u = rng.uniform(0.005, 0.05)
        Q += height * np.exp(-((ts[:, None] - kc) / width_t) ** 2 - ((u[None, :] - uc) / width_u) ** 2)
    return QField(ts, pos, Q, K_bar, T)


def ladder_field(
    rng: np.random.Generator,
    mode: str = GLOBAL,
    rungs: int = 3,
    alpha: float = 1e-3,
    eta: float = 1.0,
    epsilon: float = 0.25,
    T: float = 1.0,
    K_bar: float = 4.0,
    nodes: int = 401,
) -> tuple[QField, tuple[int, int]]:
    """Field with a planted chain of spikes that forces ``rungs`` escalations.

    Returns the field and the start point.  Each spike is 9-20 times higher
    than the one before and sits just above the bottom of its window, a
    fraction of its own window width in.  Its successor then lies below
    every earlier window, so the walk cannot skip a rung.
    """
    beta = PickParams(alpha=alpha, eta=eta, mode=mode, epsilon=epsilon).beta
    t0 = rng.uniform(0.8, 0.95) * T
    Q0 = alpha * (K_bar * T / t0) ** 1.5 * rng.uniform(1.5, 3.0)
    plan = [(t0, Q0)]
    for _ in range(rungs):
        t_prev, Q_prev = plan[-1]
        Q_next = Q_prev * rng.uniform(9.0, 20.0)
        bottom = t_prev - beta * Q_prev ** (-2.0 / 3.0)
        plan.append((bottom + rng.uniform(0.05, 0.3) * beta * Q_next ** (-2.0 / 3.0), Q_next))
    spike_times = np.array([t for t, _ in plan])
    ts = np.union1d(np.linspace(T / 50, T, 50), spike_times)
    u = np.linspace(0.0, 1.0, nodes)
    length = 10.0 * math.sqrt(T)
    spacing = 1.0 + 0.1 * np.sin(2 * np.pi * 3 * (u[1:] + rng.uniform()))
    cells = np.concatenate([[0.0], np.cumsum(spacing)])
    stretch = 1.0 + 0.05 * rng.uniform(-1, 1) * ts / T
    pos = length * stretch[:, None] * (cells / cells[-1])[None, :]
    # background stays an order of magnitude under the threshold
    Q = 0.1 * alpha * (K_bar * T / ts[:, None]) ** 1.5 * rng.uniform(0.1, 1.0, size=(ts.size, nodes))
    node = int(rng.integers(nodes // 2 - 20, nodes // 2 + 20))
    start = None
    for j, (t, q) in enumerate(plan):
        k = int(np.searchsorted(ts, t))
        if j > 0 and mode == LOCAL:
            radius = math.sqrt(beta) * plan[j - 1][1] ** (-1.0 / 3.0)
            options = [m for m in (node - 1, node, node + 1) if abs(pos[k, m] - pos[k, node]) <= radius]
            node = int(rng.choice(options))
        Q[k, node] = q
        if start is None:
            start = (k, node)
    return QField(ts, pos, Q, K_bar, T), start
