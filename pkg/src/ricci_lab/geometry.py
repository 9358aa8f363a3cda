"""Pointwise geometry of rotationally symmetric metrics on a uniform grid.

The metric is g = ds^2 + w(s)^2 g_sphere with ds = psi dx, x in [0, 1].
Two topologies are supported: ``sphere`` (w vanishes at both ends, which
are smooth poles) and ``neck`` (w > 0 everywhere, the ends are treated as
open boundaries).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveWarping, PoleRegularityViolated

EPS_FLOOR = 1e-12
POLE_TOL = 5e-2


class Topology(str, enum.Enum):
    SPHERE = "sphere"
    NECK = "neck"


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = i/N, i = 0..N."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 16:
            raise ValueError(f"grid needs N >= 16 intervals, got {self.N}")

    @property
    def nodes(self) -> int:
        return self.N + 1

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N


@dataclass(frozen=True, eq=False)
class WarpedState:
    grid: Grid
    n: int
    t: float
    psi: np.ndarray
    w: np.ndarray
    topology: Topology = Topology.SPHERE

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.n < 2:
            raise ValueError("dimension n must be >= 2")
        if psi.shape != (self.grid.nodes,) or w.shape != (self.grid.nodes,):
            raise ValueError("psi and w must have one value per grid node")
        if not np.all(psi > 0):
            raise ValueError("gauge factor psi must be positive")
        if self.topology is Topology.SPHERE and (w[0] != 0.0 or w[-1] != 0.0):
            raise ValueError("sphere topology requires w = 0 at both poles")
        psi.setflags(write=False)
        w.setflags(write=False)

    @property
    def arc_length(self) -> np.ndarray:
        """Arc length from x = 0 at every node (trapezoid rule)."""
        seg = 0.5 * (self.psi[1:] + self.psi[:-1]) * self.grid.dx
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.arc_length[-1])

    def replace(self, **changes) -> "WarpedState":
        kw = dict(grid=self.grid, n=self.n, t=self.t, psi=self.psi, w=self.w, topology=self.topology)
        kw.update(changes)
        return WarpedState(**kw)


@dataclass(frozen=True, eq=False)
class CurvatureSample:
    """Curvature scalars at every node (poles carry their smooth limits)."""

    w_s: np.ndarray
    w_ss: np.ndarray
    K0: np.ndarray
    K1: np.ndarray
    dK0: np.ndarray
    dK1: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    ric_norm: np.ndarray
    rm_norm: np.ndarray
    k_max: np.ndarray
    nabla_ric_full: np.ndarray
    nabla_ric_paper: np.ndarray
    nabla_R_sq: np.ndarray
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# finite-difference helpers
#
# Each end of the array has a boundary rule: "odd" or "even" reflection
# through the end node, or "one_sided" second-order stencils.


def _extend(f: np.ndarray, left: str, right: str) -> np.ndarray:
    g = np.empty(f.size + 2)
    g[1:-1] = f
    g[0] = 2 * f[0] - f[1] if left == "odd" else f[1]
    g[-1] = 2 * f[-1] - f[-2] if right == "odd" else f[-2]
    return g


def diff_x(f: np.ndarray, h: float, left: str, right: str) -> tuple[np.ndarray, np.ndarray]:
    """First and second x-derivatives, second-order accurate."""
    g = _extend(f, left, right)
    d1 = (g[2:] - g[:-2]) / (2 * h)
    d2 = (g[2:] - 2 * g[1:-1] + g[:-2]) / (h * h)
    if left == "one_sided":
        d1[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        d2[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)
    if right == "one_sided":
        d1[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
        d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return d1, d2


def boundary_rules(topology: Topology, neck_rule: str = "one_sided") -> tuple[str, str]:
    """(rule for w, rule for even quantities) at both ends."""
    if topology is Topology.SPHERE:
        return "odd", "even"
    return neck_rule, neck_rule


def smoothstep(u):
    """Quintic 6u^5 - 15u^4 + 10u^3 clipped to [0, 1]; C^2 at both ends."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


def smoothstep_d1(u):
    inside = (u > 0) & (u < 1)
    return np.where(inside, 30.0 * u * u * (1 - u) ** 2, 0.0)


def smoothstep_d2(u):
    inside = (u > 0) & (u < 1)
    return np.where(inside, 60.0 * u * (1 - u) * (1 - 2 * u), 0.0)


def sphere_k1(w: np.ndarray, K0: np.ndarray, x: np.ndarray) -> np.ndarray:
    """K1 for sphere topology from d(w^2 K1) = K0 d(w^2).

    Integrating from each pole (where w^2 K1 = 1 - w_s^2 = 0) avoids the
    0/0 in (1 - w_s^2)/w^2 and is exact when K0 is constant.  The two
    one-sided integrals are blended smoothly across the middle half of
    the domain.
    """
    w2 = w * w
    inc = 0.5 * (K0[1:] + K0[:-1]) * (w2[1:] - w2[:-1])
    from_left = np.concatenate([[0.0], np.cumsum(inc)])
    from_right = -np.concatenate([np.cumsum(inc[::-1])[::-1], [0.0]])
    b = smoothstep((x - 0.25) / 0.5)
    K1 = np.empty_like(w)
    K1[1:-1] = ((1 - b[1:-1]) * from_left[1:-1] + b[1:-1] * from_right[1:-1]) / w2[1:-1]
    K1[0] = K0[0]
    K1[-1] = K0[-1]
    return K1


@dataclass(frozen=True)
class ProfileTerms:
    w_s: np.ndarray
    w_ss: np.ndarray
    K0: np.ndarray
    K1: np.ndarray


def profile_terms(
    w: np.ndarray,
    psi: np.ndarray,
    h: float,
    x: np.ndarray,
    topology: Topology,
    neck_rule: str = "one_sided",
) -> ProfileTerms:
    """w_s, w_ss and both sectional curvatures; shared with the flow."""
    wrule, erule = boundary_rules(topology, neck_rule)
    w_x, w_xx = diff_x(w, h, wrule, wrule)
    psi_x, _ = diff_x(psi, h, erule, erule)
    w_s = w_x / psi
    w_ss = (w_xx - psi_x / psi * w_x) / (psi * psi)
    K0 = np.empty_like(w)
    if topology is Topology.SPHERE:
        K0[1:-1] = -w_ss[1:-1] / w[1:-1]
        # -w_sss/w_s at the pole; with odd ghosts this equals the first interior value
        K0[0] = K0[1]
        K0[-1] = K0[-2]
        K1 = sphere_k1(w, K0, x)
    else:
        K0[:] = -w_ss / w
        K1 = (1.0 - w_s * w_s) / (w * w)
    return ProfileTerms(w_s=w_s, w_ss=w_ss, K0=K0, K1=K1)


def _check_state(state: WarpedState, pole_tol: float) -> None:
    w = state.w
    if state.topology is Topology.SPHERE:
        if not np.all(w[1:-1] > 0):
            raise NonPositiveWarping("interior w <= 0 (pinched or invalid profile)")
    elif not np.all(w > 0):
        raise NonPositiveWarping("w <= 0 on a neck-topology state")
    if state.topology is Topology.SPHERE:
        h = state.grid.dx
        for end, nxt in ((0, 1), (-1, -2)):
            slope = abs(w[nxt]) / (h * state.psi[end])
            if abs(slope - 1.0) > pole_tol:
                raise PoleRegularityViolated(slope, pole_tol)


def ds(state: WarpedState, f: np.ndarray, parity: str = "even") -> tuple[np.ndarray, np.ndarray]:
    """First and second arc-length derivatives of a scalar field."""
    h = state.grid.dx
    rule = parity if state.topology is Topology.SPHERE else "one_sided"
    _, erule = boundary_rules(state.topology)
    f_x, f_xx = diff_x(np.asarray(f, dtype=float), h, rule, rule)
    psi_x, _ = diff_x(state.psi, h, erule, erule)
    f_s = f_x / state.psi
    f_ss = (f_xx - psi_x / state.psi * f_x) / state.psi**2
    return f_s, f_ss


def curvature_sample(state: WarpedState, pole_tol: float = POLE_TOL) -> CurvatureSample:
    """All curvature scalars of ``state``.

    Raises NonPositiveWarping for non-positive interior w and
    PoleRegularityViolated when |w_s| at a pole is farther than
    ``pole_tol`` from 1.
    """
    _check_state(state, pole_tol)
    n = state.n
    terms = profile_terms(state.w, state.psi, state.grid.dx, state.grid.x, state.topology)
    K0, K1 = terms.K0, terms.K1
    lam = (n - 1) * K0
    mu = K0 + (n - 2) * K1
    R = lam + (n - 1) * mu
    dK0, _ = ds(state, K0)
    dK1, _ = ds(state, K1)
    dlam, _ = ds(state, lam)
    dmu, _ = ds(state, mu)
    dR, _ = ds(state, R)

    mixed = np.zeros_like(K0)
    if state.topology is Topology.SPHERE:
        i = slice(1, -1)
        mixed[i] = (terms.w_s[i] / state.w[i]) ** 2 * (lam[i] - mu[i]) ** 2
    else:
        mixed[:] = (terms.w_s / state.w) ** 2 * (lam - mu) ** 2
    nabla_full = dlam**2 + (n - 1) * dmu**2 + 2 * (n - 1) * mixed
    nabla_paper = (n - 1) ** 2 * dK0**2 + (dK0 + (n - 2) * dK1) ** 2

    return CurvatureSample(
        w_s=terms.w_s,
        w_ss=terms.w_ss,
        K0=K0,
        K1=K1,
        dK0=dK0,
        dK1=dK1,
        lam=lam,
        mu=mu,
        R=R,
        dR=dR,
        ric_norm=np.sqrt(lam**2 + (n - 1) * mu**2),
        rm_norm=np.sqrt(4 * (n - 1) * K0**2 + 2 * (n - 1) * (n - 2) * K1**2),
        k_max=np.maximum(np.abs(K0), np.abs(K1)),
        nabla_ric_full=nabla_full,
        nabla_ric_paper=nabla_paper,
        nabla_R_sq=dR**2,
    )


def laplacian_radial(state: WarpedState, f: np.ndarray, sample: CurvatureSample | None = None) -> np.ndarray:
    """Laplacian of a rotationally symmetric function: f_ss + (n-1)(w_s/w) f_s."""
    f = np.asarray(f, dtype=float)
    if f.shape != state.w.shape:
        raise ValueError("field is not aligned with the grid")
    _check_state(state, np.inf)
    if sample is None:
        w_s = profile_terms(state.w, state.psi, state.grid.dx, state.grid.x, state.topology).w_s
    else:
        w_s = sample.w_s
    f_s, f_ss = ds(state, f)
    out = np.empty_like(f)
    if state.topology is Topology.SPHERE:
        i = slice(1, -1)
        out[i] = f_ss[i] + (state.n - 1) * w_s[i] / state.w[i] * f_s[i]
        out[0] = state.n * f_ss[0]
        out[-1] = state.n * f_ss[-1]
    else:
        out[:] = f_ss + (state.n - 1) * w_s / state.w * f_s
    return out


def distance(state: WarpedState, x_a: float, x_b: float) -> float:
    """Radial geodesic distance: integral of psi dx with psi linearly interpolated."""
    for v in (x_a, x_b):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"coordinate {v} outside [0, 1]")
    return abs(_arc_at(state, x_b) - _arc_at(state, x_a))


def _arc_at(state: WarpedState, x: float) -> float:
    N, h = state.grid.N, state.grid.dx
    s = state.arc_length
    j = min(int(np.floor(x * N)), N - 1)
    u = x - j * h
    p0, p1 = state.psi[j], state.psi[j + 1]
    return float(s[j] + u * p0 + (p1 - p0) * u * u / (2 * h))


def critical_w_min(state: WarpedState) -> float:
    """Smallest w at interior nodes where w_s changes sign (+inf if none)."""
    w = state.w
    left = w[1:-1] - w[:-2]
    right = w[2:] - w[1:-1]
    crit = left * right <= 0
    if not np.any(crit):
        return np.inf
    return float(np.min(w[1:-1][crit]))


def inj_lower_bound(state: WarpedState, sample: CurvatureSample) -> float:
    """Klingenberg-style surrogate for the injectivity radius.

    min(pi / sqrt(max positive sectional curvature), half the length of the
    shortest equator or neck circle), capped at the domain diameter.  This
    is an estimator, not the exact injectivity radius.
    """
    if state.topology is Topology.SPHERE:
        if not np.all(state.w[1:-1] > 0):
            raise NonPositiveWarping("interior w <= 0")
    elif not np.all(state.w > 0):
        raise NonPositiveWarping("w <= 0")
    k_plus = max(float(np.max(sample.K0)), float(np.max(sample.K1)), 0.0)
    conj = np.pi / np.sqrt(max(k_plus, EPS_FLOOR))
    return float(min(conj, np.pi * critical_w_min(state), state.length))
