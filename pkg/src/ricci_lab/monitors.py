"""Observed constants of the derivative and curvature estimates along a run.

Every ratio here is invariant under the parabolic rescaling
g -> c g, t -> c t, so the numbers are comparable across scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from .errors import EmptyHistory, InsufficientSnapshots
from .flow import FlowHistory, evolution_residuals
from .geometry import inj_lower_bound

SERIES_COLUMNS = (
    "t",
    "sup_ric",
    "sup_rm",
    "sup_nabla_ric_full",
    "sup_nabla_ric_paper",
    "sup_nabla_R",
    "inj_est",
    "shi_ratio",
    "shi_ratio_h",
    "rm_ratio",
    "taming_product",
    "beta_needed",
    "shig_ratio",
    "residual_max",
)


@dataclass(frozen=True)
class MonitorParams:
    alpha: float = 1.0
    beta: float = 1.0
    eta: float = 1.0
    delta: float = 1e-3
    m: float = 2.0
    h_kind: str = "linear"
    use_alt_norm: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "eta", "delta", "m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.h_kind not in ("linear", "sine"):
            raise ValueError(f"unknown h_kind {self.h_kind!r}")

    @classmethod
    def from_config(cls, cfg) -> "MonitorParams":
        return cls(cfg.alpha, cfg.beta, cfg.eta, cfg.delta, cfg.m, cfg.h_kind)


def h_function(kind: str, T: float) -> Callable[[float], float]:
    if kind == "linear":
        return lambda t: t
    if kind == "sine":
        return lambda t: T / math.pi * math.sin(math.pi * t / T)
    raise ValueError(f"unknown h_kind {kind!r}")


@dataclass(frozen=True)
class SeriesRow:
    t: float
    sup_ric: float
    sup_rm: float
    sup_nabla_ric_full: float
    sup_nabla_ric_paper: float
    sup_nabla_R: float
    inj_est: float
    shi_ratio: float
    shi_ratio_h: float
    rm_ratio: float
    taming_product: float
    beta_needed: float
    shig_ratio: float
    residual_max: float

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class MonitorSummary:
    K_bar: float
    Lambda0: float
    T: float
    shi_ratio_max: float
    shi_ratio_h_max: float
    rm_ratio_max: float
    taming_early: float  # max of t sup|Rm| over t <= 1/K_bar
    taming_late: float  # max of sup|Rm| / K_bar over 1/K_bar <= t <= T
    beta_needed_max: float
    shig_ratio_max: float
    delta_observed: float  # a lower bound: built on the inj surrogate
    # the same ratios with the alternative derivative norm
    shi_ratio_max_alt: float
    shi_ratio_h_max_alt: float
    shig_ratio_max_alt: float
    rows: tuple[SeriesRow, ...]

    @property
    def taming_max(self) -> float:
        return max(self.taming_early, self.taming_late)


def _ratio(sup_nric: float, K: float, T: float, tau: float) -> float:
    """sup|nabla Ric| / (K T / tau)^{3/2}, written to stay finite at tau = 0."""
    if tau <= 0:
        return 0.0
    return sup_nric * (tau / (K * T)) ** 1.5


def beta_needed(nric: np.ndarray, dR_abs: np.ndarray, alpha: float, K: float, t: float) -> float:
    """Smallest beta with |nabla Ric| <= alpha K t^{-1/2} + beta |nabla R| at every node."""
    if t <= 0:
        return 0.0
    excess = nric - alpha * K / math.sqrt(t)
    mask = (excess > 0) & (dR_abs > 1e-12 * K**1.5)
    if not np.any(mask):
        return 0.0
    return float(np.max(excess[mask] / dR_abs[mask]))


def series(history: FlowHistory, params: MonitorParams | None = None) -> list[SeriesRow]:
    """One row per snapshot, computed from the stored states only."""
    if len(history) == 0:
        raise EmptyHistory("no snapshots")
    params = params or MonitorParams()
    K, T = history.K_bar, history.T_end
    h = h_function(params.h_kind, T)
    try:
        res = evolution_residuals(history)
        residual = [math.nan] + [float(v) for v in res.max] + [math.nan]
    except InsufficientSnapshots:
        residual = [math.nan] * len(history)
    rows = []
    for k, (state, c) in enumerate(history.snapshots):
        t = state.t
        full = math.sqrt(float(np.max(c.nabla_ric_full)))
        paper = math.sqrt(float(np.max(c.nabla_ric_paper)))
        nric_arr = np.sqrt(c.nabla_ric_paper if params.use_alt_norm else c.nabla_ric_full)
        sup_nric = paper if params.use_alt_norm else full
        sup_rm = float(np.max(c.rm_norm))
        rows.append(
            SeriesRow(
                t=t,
                sup_ric=float(np.max(c.ric_norm)),
                sup_rm=sup_rm,
                sup_nabla_ric_full=full,
                sup_nabla_ric_paper=paper,
                sup_nabla_R=math.sqrt(float(np.max(c.nabla_R_sq))),
                inj_est=inj_lower_bound(state, c),
                shi_ratio=_ratio(sup_nric, K, T, t),
                shi_ratio_h=_ratio(sup_nric, K, T, h(t)),
                rm_ratio=sup_rm * t / (K * T),
                taming_product=t * sup_rm,
                beta_needed=beta_needed(nric_arr, np.abs(c.dR), params.alpha, K, t),
                shig_ratio=t * float(np.max(nric_arr)) ** 2 / K**2,
                residual_max=residual[k],
            )
        )
    return rows


def summary(history: FlowHistory, params: MonitorParams | None = None) -> MonitorSummary:
    params = params or MonitorParams()
    rows = series(history, params)
    K, T = history.K_bar, history.T_end
    alt = MonitorParams(**{**params.__dict__, "use_alt_norm": not params.use_alt_norm})
    alt_rows = series_alt(history, alt, rows)
    early = [r.taming_product for r in rows if r.t <= 1.0 / K]
    late = [r.sup_rm / K for r in rows if 1.0 / K <= r.t <= T]
    return MonitorSummary(
        K_bar=K,
        Lambda0=history.Lambda0,
        T=T,
        shi_ratio_max=max(r.shi_ratio for r in rows),
        shi_ratio_h_max=max(r.shi_ratio_h for r in rows),
        rm_ratio_max=max(r.rm_ratio for r in rows),
        taming_early=max(early) if early else 0.0,
        taming_late=max(late) if late else 0.0,
        beta_needed_max=max(r.beta_needed for r in rows),
        shig_ratio_max=max(r.shig_ratio for r in rows),
        delta_observed=min(r.inj_est for r in rows) * math.sqrt(K),
        shi_ratio_max_alt=max(a[0] for a in alt_rows),
        shi_ratio_h_max_alt=max(a[1] for a in alt_rows),
        shig_ratio_max_alt=max(a[2] for a in alt_rows),
        rows=tuple(rows),
    )


def series_alt(history: FlowHistory, params: MonitorParams, rows: list[SeriesRow]) -> list[tuple[float, float, float]]:
    """(shi_ratio, shi_ratio_h, shig_ratio) with the norm selected by ``params``."""
    K, T = history.K_bar, history.T_end
    h = h_function(params.h_kind, T)
    out = []
    for r in rows:
        sup_nric = r.sup_nabla_ric_paper if params.use_alt_norm else r.sup_nabla_ric_full
        out.append((_ratio(sup_nric, K, T, r.t), _ratio(sup_nric, K, T, h(r.t)), r.t * sup_nric**2 / K**2))
    return out


def rescale(history: FlowHistory, c: float) -> FlowHistory:
    """Parabolic rescaling g -> c g, t -> c t of a stored history."""
    root = math.sqrt(c)
    states = [s.replace(t=c * s.t, psi=root * s.psi, w=root * s.w) for s in history.states]
    return FlowHistory.from_states(states, history.scenario, history.stop_reason)


# ---------------------------------------------------------------------------
# admissibility of the time weight h


@dataclass(frozen=True)
class HReport:
    kind: str
    T: float
    m: float
    below_t: bool  # h(t) <= t on the sampled range
    positive: bool
    m_required: float  # tightest m with min_{[t/2, t]} h >= h(t)/m
    valid: bool


def validate_h(kind, T: float, m: float = 2.0, samples: int = 512, inner: int = 257) -> HReport:
    """Check h <= t and the doubling condition on a log grid of t*.

    ``kind`` is "linear", "sine" or any callable h(t).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    h = kind if callable(kind) else h_function(kind, T)
    name = getattr(kind, "__name__", "custom") if callable(kind) else kind
    t_star = np.geomspace(T * 1e-6, T, samples)
    below, positive, need = True, True, 1.0
    for ts in t_star:
        tt = np.linspace(ts / 2, ts, inner)
        hv = np.array([h(float(v)) for v in tt])
        top = float(hv[-1])
        if np.any(hv > tt * (1 + 1e-12)):
            below = False
        # h may touch zero only at the far endpoint T (the sine weight does)
        interior = hv[:-1] if ts == t_star[-1] else hv
        if np.any(interior <= 0):
            positive = False
            continue
        low = float(np.min(hv))
        if top > 0 and low > 0:
            need = max(need, top / low)
    valid = below and positive and need <= m * (1 + 1e-12)
    return HReport(kind=name, T=T, m=m, below_t=below, positive=positive, m_required=need, valid=valid)
