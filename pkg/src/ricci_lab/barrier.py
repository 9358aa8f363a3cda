"""Cutoff functions and the barrier argument behind the local derivative bound.

The cutoff chi is built once at t = 0 as a function of arc length about
the domain centre and then frozen in the grid coordinate, so its
gradient and Hessian change only through the evolving metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import HorizonExceeded, RadiusTooLarge, RangeError
from .flow import FlowHistory, time_derivative
from .geometry import (
    WarpedState,
    boundary_rules,
    diff_x,
    ds,
    laplacian_radial,
    smoothstep,
    smoothstep_d1,
    smoothstep_d2,
)

MEASURE_FLOOR = 1.0


@dataclass(frozen=True, eq=False)
class Cutoff:
    radius: float
    centre: float  # arc length of the centre at t = 0
    chi: np.ndarray
    chi_x: np.ndarray  # coordinate derivatives, fixed in time
    chi_xx: np.ndarray
    A_grad: float  # sup |d_s chi| at t = 0
    A_hess: float  # r sup |d_ss chi| at t = 0

    @property
    def plateau(self) -> float:
        return self.radius / math.sqrt(2.0)

    @property
    def A_measured(self) -> float:
        return max(self.A_grad, self.A_hess, 1.0 + 1e-9)

    @property
    def support(self) -> np.ndarray:
        return self.chi > 0


def _psi_x(state: WarpedState) -> np.ndarray:
    _, rule = boundary_rules(state.topology)
    return diff_x(state.psi, state.grid.dx, rule, rule)[0]


def build_cutoff(state0: WarpedState, r: float) -> Cutoff:
    """r on the ball of radius r/sqrt(2), 0 outside radius r, quintic blend between."""
    s = state0.arc_length
    half = 0.5 * state0.length
    if not 0 < r < half:
        raise RadiusTooLarge(f"cutoff radius {r} must lie in (0, {half})")
    centre = half
    a = r / math.sqrt(2.0)
    width = r - a
    d = np.abs(s - centre)
    u = (d - a) / width
    sign = np.sign(s - centre)
    chi = r * (1.0 - smoothstep(u))
    chi_s = -r * smoothstep_d1(u) / width * sign
    chi_ss = -r * smoothstep_d2(u) / width**2
    psi0 = state0.psi
    chi_x = chi_s * psi0
    chi_xx = chi_ss * psi0**2 + chi_s * _psi_x(state0)
    return Cutoff(
        radius=r,
        centre=centre,
        chi=chi,
        chi_x=chi_x,
        chi_xx=chi_xx,
        A_grad=float(np.max(np.abs(chi_s))),
        A_hess=float(r * np.max(np.abs(chi_ss))),
    )


def cutoff_derivatives(state: WarpedState, cutoff: Cutoff) -> tuple[np.ndarray, np.ndarray]:
    """(d_s chi, d_ss chi) in the metric of ``state``."""
    psi = state.psi
    chi_s = cutoff.chi_x / psi
    chi_ss = (cutoff.chi_xx - _psi_x(state) / psi * cutoff.chi_x) / psi**2
    return chi_s, chi_ss


def hessian_norm(state: WarpedState, w_s: np.ndarray, f_s: np.ndarray, f_ss: np.ndarray) -> np.ndarray:
    """|Hess f| of a radial function: eigenvalues f_ss and (w_s/w) f_s, the latter n-1 times."""
    ratio = np.zeros_like(f_s)
    inner = state.w > 0
    ratio[inner] = w_s[inner] / state.w[inner] * f_s[inner]
    return np.sqrt(f_ss**2 + (state.n - 1) * ratio**2)


# ---------------------------------------------------------------------------
# time dependence of the cutoff


@dataclass(frozen=True)
class LemmaBSeries:
    times: np.ndarray
    grad_sq: np.ndarray  # sup |grad chi|^2
    hess_prod: np.ndarray  # sup chi |Hess chi|
    bound: np.ndarray  # A^2 e^{2 K t}
    A: float
    K: float
    within_bound: bool
    first_grad_violation: float | None  # first time sup |grad chi|^2 > 2 A^2
    first_hess_violation: float | None

    @property
    def first_violation(self) -> float | None:
        hits = [t for t in (self.first_grad_violation, self.first_hess_violation) if t is not None]
        return min(hits) if hits else None


def lemma_b_track(history: FlowHistory, cutoff: Cutoff, K: float | None = None, A: float | None = None) -> LemmaBSeries:
    K = history.K_bar if K is None else K
    A = cutoff.A_measured if A is None else A
    times, grad, hess = [], [], []
    for state, sample in history.snapshots:
        chi_s, chi_ss = cutoff_derivatives(state, cutoff)
        times.append(state.t)
        grad.append(float(np.max(chi_s**2)))
        hess.append(float(np.max(cutoff.chi * hessian_norm(state, sample.w_s, chi_s, chi_ss))))
    times, grad, hess = np.array(times), np.array(grad), np.array(hess)
    bound = A * A * np.exp(2 * K * times)

    def first(series):
        over = np.flatnonzero(series > 2 * A * A)
        return float(times[over[0]]) if over.size else None

    return LemmaBSeries(
        times=times,
        grad_sq=grad,
        hess_prod=hess,
        bound=bound,
        A=A,
        K=K,
        within_bound=bool(np.all(grad <= bound * (1 + 1e-12))),
        first_grad_violation=first(grad),
        first_hess_violation=first(hess),
    )


def gauge_shrink_history(state0: WarpedState, K: float, t_end: float, count: int = 2001) -> FlowHistory:
    """Metric scaled by e^{-2 K t}: every length, psi and w alike, shrinks like e^{-K t}."""
    states = []
    for t in np.linspace(0.0, t_end, count):
        f = math.exp(-K * t)
        states.append(state0.replace(t=float(t), psi=state0.psi * f, w=state0.w * f))
    return FlowHistory.from_states(states)


# ---------------------------------------------------------------------------
# barrier constants


@dataclass(frozen=True)
class LemmaAMargins:
    n: int
    theta1: float
    c: int
    d: float
    margin_c: float
    margin_d: float
    margin_c_exact: Fraction
    margin_d_exact: Fraction

    @property
    def ok(self) -> bool:
        return self.margin_c_exact > 0 and self.margin_d_exact > 0


def lemma_a_margins(n: int, theta1: float) -> LemmaAMargins:
    """c^2 - ((12 + 4n) c + 2) and d^2 - (2(1 + theta1)^2 + d), in exact arithmetic."""
    if not 0 < theta1 < 1:
        raise ValueError("theta1 must lie in (0, 1)")
    if n < 2:
        raise ValueError("n must be at least 2")
    c = 14 + 4 * n
    th = Fraction(theta1)
    d = 2 * (1 + th)
    mc = Fraction(c * c - ((12 + 4 * n) * c + 2))
    md = d * d - (2 * (1 + th) ** 2 + d)
    return LemmaAMargins(n, theta1, c, float(d), float(mc), float(md), mc, md)


@dataclass(frozen=True)
class BarrierParams:
    n: int
    theta1: float
    A: float
    C1: float
    C2: float
    B_const: float
    c: int
    d: float

    @property
    def B_min(self) -> float:
        return max(self.n**2 + 4 * self.n / self.C1, 32 * self.n**2)

    @property
    def b_F(self) -> float:
        B2 = self.B_const**2
        return min(1.0 / (4 * B2), 1.0 / (self.C2 * B2))


def barrier_params(n: int, theta1: float, A: float, C1: float, C2: float, B_const: float | None = None) -> BarrierParams:
    if not 0 < theta1 < 1:
        raise ValueError("theta1 must lie in (0, 1)")
    if C1 <= 0 or C2 <= 0:
        raise ValueError("C1 and C2 must be positive")
    B_min = max(n**2 + 4 * n / C1, 32 * n**2)
    B = B_min + 1.0 if B_const is None else float(B_const)
    if not B > B_min:
        raise RangeError("B_const", f"must exceed {B_min}")
    return BarrierParams(n, theta1, A, C1, C2, B, 14 + 4 * n, 2 * (1 + theta1))


# ---------------------------------------------------------------------------
# the barrier comparison on recorded data


@dataclass(frozen=True)
class ShilReport:
    params: BarrierParams
    times: np.ndarray  # snapshots inside the horizon, t > 0
    C1_measured: float  # nan when fewer than three snapshots fit the horizon
    C2_measured: float
    F_max: np.ndarray  # per snapshot, over the cutoff support
    H_min: np.ndarray
    margin_min: float  # min over everything of H - F
    first_crossing: float | None
    C_fit: float  # best C in |nabla Ric|^2 <= C K^2 u on the plateau
    horizon: float
    excluded: int  # snapshots dropped for lying past the horizon

    @property
    def barrier_holds(self) -> bool:
        return self.first_crossing is None


def _radial_hessian_sq(state, sample, f) -> np.ndarray:
    f_s, f_ss = ds(state, f)
    return hessian_norm(state, sample.w_s, f_s, f_ss) ** 2


def shil_quantities(
    history: FlowHistory,
    cutoff: Cutoff,
    theta1: float = 0.5,
    B_const: float | None = None,
    A: float | None = None,
) -> ShilReport:
    """Compare F = b S / K^4 with the barrier H on the cutoff support.

    S = (B K^2 + R^2)|grad R|^2.  C1 and C2 are the smallest constants for
    which the two differential inequalities driving the argument hold on
    the data, floored at MEASURE_FLOOR.
    """
    K = history.K_bar
    n = history.states[0].n
    horizon = theta1 / K
    A = cutoff.A_measured if A is None else A
    r = cutoff.radius
    supp = cutoff.support
    times_all = history.times
    inside = [k for k, t in enumerate(times_all) if t <= horizon * (1 + 1e-12)]
    excluded = len(history) - len(inside)
    positive = [k for k in inside if times_all[k] > 0]
    if not positive:
        raise HorizonExceeded(f"no snapshot with 0 < t <= theta1/K_bar = {horizon:.6g}")

    G = [s.nabla_R_sq for s in history.samples]

    def u_at(t):
        return 1.0 / r**2 + 1.0 / t + K

    # smallest C1 with G_t <= lap G - 2|Hess R|^2 + C1 K G + C1 K^3 u
    C1_meas = math.nan
    interior = [k for k in positive if k - 1 >= 0 and k + 1 in inside]
    if interior:
        C1_meas = 0.0
        for k in interior:
            state, sample = history.snapshots[k]
            lhs = time_derivative(times_all, G, k) - laplacian_radial(state, G[k], sample)
            lhs += 2 * _radial_hessian_sq(state, sample, sample.R)
            coef = K * G[k] + K**3 * u_at(times_all[k])
            C1_meas = max(C1_meas, float(np.max(lhs[supp] / coef[supp])))
    C1 = max(MEASURE_FLOOR, C1_meas) if interior else MEASURE_FLOOR

    B = max(n**2 + 4 * n / C1, 32 * n**2) + 1.0 if B_const is None else float(B_const)
    S = [(B * K * K + s.R**2) * g for s, g in zip(history.samples, G)]

    # smallest C2 with S_t <= lap S - |grad R|^4 + C2 B^2 K^5 u
    C2_meas = math.nan
    if interior:
        C2_meas = 0.0
        for k in interior:
            state, sample = history.snapshots[k]
            lhs = time_derivative(times_all, S, k) - laplacian_radial(state, S[k], sample) + G[k] ** 2
            coef = B * B * K**5 * u_at(times_all[k])
            C2_meas = max(C2_meas, float(np.max(lhs[supp]) / coef))
    C2 = max(MEASURE_FLOOR, C2_meas) if interior else MEASURE_FLOOR

    params = barrier_params(n, theta1, A, C1, C2, B)
    b = params.b_F
    plateau = supp & (cutoff.chi >= r * (1 - 1e-12))
    F_max, H_min, crossing, margin, C_fit = [], [], None, math.inf, 0.0
    for k in positive:
        t = float(times_all[k])
        F = b * S[k][supp] / K**4
        H = params.c * A * A / cutoff.chi[supp] ** 2 + params.d / t + K
        F_max.append(float(np.max(F)))
        H_min.append(float(np.min(H)))
        gap = float(np.min(H - F))
        margin = min(margin, gap)
        if crossing is None and gap <= 0:
            crossing = float(t)
        nric = history.samples[k].nabla_ric_full[plateau]
        if nric.size:
            C_fit = max(C_fit, float(np.max(nric) / (K * K * u_at(t))))
    return ShilReport(
        params=params,
        times=times_all[positive],
        C1_measured=C1_meas,
        C2_measured=C2_meas,
        F_max=np.array(F_max),
        H_min=np.array(H_min),
        margin_min=margin,
        first_crossing=crossing,
        C_fit=C_fit,
        horizon=horizon,
        excluded=excluded,
    )
