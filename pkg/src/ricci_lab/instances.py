"""Synthetic inputs that satisfy the Bianchi identities by construction.

Tensor instances come from an actual metric: a cubic polynomial metric on
a coordinate patch, whose Ricci tensor and its covariant derivative are
evaluated at the origin.  Profiles for the warped-product inequality come
from integrating w'' = -K0 w for a prescribed decreasing K0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .decomposition import PointTensorInstance
from .geometry import Grid, Topology, WarpedState


# ---------------------------------------------------------------------------
# polynomial metrics


@dataclass(frozen=True, eq=False)
class PolynomialMetric:
    """g(x) = G + D1.x + 1/2 D2.x.x + 1/6 D3.x.x.x (all symmetric)."""

    G: np.ndarray  # (n, n)
    D1: np.ndarray  # (n, n, n): [a, b, k] = d_k g_ab at 0
    D2: np.ndarray  # (n, n, n, n)
    D3: np.ndarray  # (n, n, n, n, n)

    @property
    def n(self) -> int:
        return self.G.shape[0]

    def jets(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """g, dg, ddg at point p (dg[a,b,k], ddg[a,b,k,l])."""
        g = (
            self.G
            + np.einsum("abk,k->ab", self.D1, p)
            + 0.5 * np.einsum("abkl,k,l->ab", self.D2, p, p)
            + np.einsum("abklm,k,l,m->ab", self.D3, p, p, p) / 6.0
        )
        dg = self.D1 + np.einsum("abkl,l->abk", self.D2, p) + 0.5 * np.einsum("abklm,l,m->abk", self.D3, p, p)
        ddg = self.D2 + np.einsum("abklm,m->abkl", self.D3, p)
        return g, dg, ddg


def _sym_derivs(rng, n: int, order: int, scale: float) -> np.ndarray:
    """Random array symmetric in the metric pair and in the derivative slots."""
    import itertools

    shape = (n, n) + (n,) * order
    A = rng.normal(scale=scale, size=shape)
    A = 0.5 * (A + np.swapaxes(A, 0, 1))
    if order > 1:
        perms = list(itertools.permutations(range(2, 2 + order)))
        A = sum(np.transpose(A, (0, 1) + p) for p in perms) / len(perms)
    return A


def random_metric(rng: np.random.Generator, n: int, scale: float = 0.3) -> PolynomialMetric:
    M = rng.normal(size=(n, n))
    G = np.eye(n) + 0.3 * (M @ M.T) / n
    return PolynomialMetric(
        G=G,
        D1=_sym_derivs(rng, n, 1, scale),
        D2=_sym_derivs(rng, n, 2, scale),
        D3=_sym_derivs(rng, n, 3, scale),
    )


def _lower(D: np.ndarray) -> np.ndarray:
    """L_dbc = d_b g_dc + d_c g_db - d_d g_bc, with D[a, b, k, ...] = d_k (...) g_ab."""
    return np.swapaxes(D, 1, 2) + D - np.einsum("bcd...->dbc...", D)


def _ricci_from_jets(g, dg, ddg):
    """Ricci tensor from g, dg and ddg at one point (no derivative of Ricci)."""
    gi = np.linalg.inv(g)
    L = _lower(dg)
    Gam = 0.5 * np.einsum("ad,dbc->abc", gi, L)
    dgi = -np.einsum("ab,bck,cd->adk", gi, dg, gi)
    dL = _lower(ddg)
    dGam = 0.5 * (np.einsum("ade,dbc->abce", dgi, L) + np.einsum("ad,dbce->abce", gi, dL))
    # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb ; Ric_bd = R^a_bad
    ric = (
        np.einsum("adba->bd", dGam)
        - np.einsum("aabd->bd", dGam)
        + np.einsum("aae,edb->bd", Gam, Gam)
        - np.einsum("ade,eab->bd", Gam, Gam)
    )
    return ric, Gam, gi


def exact_instance(metric: PolynomialMetric) -> PointTensorInstance:
    """T = nabla Ric and dR at the origin, by exact differentiation of the jets."""
    n = metric.n
    G, D1, D2, D3 = metric.G, metric.D1, metric.D2, metric.D3
    gi = np.linalg.inv(G)
    # inverse metric derivatives
    dgi = -np.einsum("ab,bck,cd->adk", gi, D1, gi)
    ddgi = (
        -np.einsum("ab,bckl,cd->adkl", gi, D2, gi)
        + np.einsum("ab,bck,ce,efl,fd->adkl", gi, D1, gi, D1, gi, optimize=True)
        + np.einsum("ab,bcl,ce,efk,fd->adkl", gi, D1, gi, D1, gi, optimize=True)
    )
    L = _lower(D1)
    dL = _lower(D2)  # [d, b, c, e]
    ddL = _lower(D3)  # [d, b, c, e, f]
    Gam = 0.5 * np.einsum("ad,dbc->abc", gi, L)
    dGam = 0.5 * (np.einsum("ade,dbc->abce", dgi, L) + np.einsum("ad,dbce->abce", gi, dL))
    ddGam = 0.5 * (
        np.einsum("adef,dbc->abcef", ddgi, L)
        + np.einsum("ade,dbcf->abcef", dgi, dL)
        + np.einsum("adf,dbce->abcef", dgi, dL)
        + np.einsum("ad,dbcef->abcef", gi, ddL)
    )
    # Ric_bd = d_a G^a_db - d_d G^a_ab + G^a_ae G^e_db - G^a_de G^e_ab
    ric = (
        np.einsum("adba->bd", dGam)
        - np.einsum("aabd->bd", dGam)
        + np.einsum("aae,edb->bd", Gam, Gam)
        - np.einsum("ade,eab->bd", Gam, Gam)
    )
    dric = (
        np.einsum("adbaf->bdf", ddGam)
        - np.einsum("aabdf->bdf", ddGam)
        + np.einsum("aaef,edb->bdf", dGam, Gam)
        + np.einsum("aae,edbf->bdf", Gam, dGam)
        - np.einsum("adef,eab->bdf", dGam, Gam)
        - np.einsum("ade,eabf->bdf", Gam, dGam)
    )
    # nabla_f R_bd = d_f R_bd - G^e_fb R_ed - G^e_fd R_be
    T = (
        np.einsum("bdf->fbd", dric)
        - np.einsum("efb,ed->fbd", Gam, ric)
        - np.einsum("efd,be->fbd", Gam, ric)
    )
    T = 0.5 * (T + np.swapaxes(T, 1, 2))
    dR = np.einsum("bdf,bd->f", dgi, ric) + np.einsum("bd,bdf->f", gi, dric)
    assert T.shape == (n, n, n)
    return PointTensorInstance(g=G.copy(), T=T, dR=dR)


def fd_instance(metric: PolynomialMetric, eps: float = 1e-3) -> PointTensorInstance:
    """Same quantities, but d Ric by fourth-order central differences of Ricci."""
    n = metric.n
    g0, dg0, ddg0 = metric.jets(np.zeros(n))
    ric0, Gam0, gi0 = _ricci_from_jets(g0, dg0, ddg0)
    dric = np.zeros((n, n, n))
    for f in range(n):
        e = np.zeros(n)
        e[f] = eps
        vals = [_ricci_from_jets(*metric.jets(k * e))[0] for k in (-2, -1, 1, 2)]
        dric[:, :, f] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * eps)
    T = np.einsum("bdf->fbd", dric) - np.einsum("efb,ed->fbd", Gam0, ric0) - np.einsum("efd,be->fbd", Gam0, ric0)
    T = 0.5 * (T + np.swapaxes(T, 1, 2))
    dgi = -np.einsum("ab,bck,cd->adk", gi0, dg0, gi0)
    dR = np.einsum("bdf,bd->f", dgi, ric0) + np.einsum("bd,bdf->f", gi0, dric)
    return PointTensorInstance(g=g0, T=T, dR=dR)


def random_instance(rng: np.random.Generator, n: int) -> PointTensorInstance:
    return exact_instance(random_metric(rng, n))


# ---------------------------------------------------------------------------
# warped profiles with monotone curvatures


def monotone_curvature_profile(
    rng: np.random.Generator, n: int, N: int = 400
) -> WarpedState:
    """Neck-topology window of a warped metric with dK0 < 0 and dK1 < 0.

    K0(s) = k0 - k1 s - k2 s^2 with k1, k2 > 0 is strictly decreasing.  For
    w'' = -K0 w, w(0) = 0, w'(0) = 1, the identity (w^2 K1)' = K0 (w^2)'
    makes K1 >= K0 wherever w has been increasing, so
    K1' = 2 (w'/w)(K0 - K1) <= 0 as well.  The window stays inside the
    region where w' > 0 and away from s = 0.
    """
    while True:
        k0 = rng.uniform(-0.5, 1.5)
        k1 = rng.uniform(0.3, 2.0)
        k2 = rng.uniform(0.0, 1.0)

        def rhs(s, y):
            K0 = k0 - k1 * s - k2 * s * s
            return [y[1], -K0 * y[0]]

        def turning(s, y):
            return y[1] - 0.05

        turning.terminal = True
        s_max = 3.0
        sol = solve_ivp(rhs, (0.0, s_max), [0.0, 1.0], rtol=1e-12, atol=1e-14, events=turning, dense_output=True)
        s_hi = float(sol.t[-1])
        if s_hi < 0.6:
            continue
        s_a = rng.uniform(0.2, 0.4) * s_hi
        s_b = rng.uniform(0.75, 0.95) * s_hi
        grid = Grid(N)
        s = s_a + (s_b - s_a) * grid.x
        w = sol.sol(s)[0]
        psi = np.full(grid.nodes, s_b - s_a)
        return WarpedState(grid, n, 0.0, psi, w, Topology.NECK)
