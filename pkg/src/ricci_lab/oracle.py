"""Brute-force coordinate computation of |nabla Ric|^2 for warped metrics.

Independent of the closed form in :mod:`ricci_lab.geometry`.  The metric
is assembled on the three-dimensional chart (x, theta, phi) as
diag(psi^2, w^2, w^2 sin^2 theta) around theta = pi/2.  Christoffel
symbols, the Riemann tensor and the covariant derivative of Ricci are all
obtained from finite differences of the previous stage (centered
three-point in x, seven-point in theta).  The n-dimensional Ricci tensor
adds the curvature of the n - 3 sphere directions outside the chart, and
the final contraction weights each index pattern by the number of sphere
directions it stands for.
"""

from __future__ import annotations

import itertools

import numpy as np

from .geometry import Topology, WarpedState, _check_state

# 7-point central first-derivative weights (sixth order)
_W7 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_DTHETA = 2e-2
_X_GHOSTS = 3


def _dx(f: np.ndarray, h: float) -> np.ndarray:
    """Centered x-derivative along axis 0; the result loses one node per side."""
    return (f[2:] - f[:-2]) / (2 * h)


def _dtheta(f: np.ndarray) -> np.ndarray:
    """Seven-point theta-derivative along axis 1; loses three offsets per side."""
    m = f.shape[1]
    out = np.zeros((f.shape[0], m - 6) + f.shape[2:])
    for k, c in enumerate(_W7):
        if c:
            out += c * f[:, k : k + m - 6]
    return out / _DTHETA


def _grad(f: np.ndarray, h: float) -> np.ndarray:
    """Partial derivatives (d_x, d_theta, d_phi) stacked on a new axis 2.

    Input shape (X, Th, ...); output (X-2, Th-6, 3, ...).  Nothing depends
    on phi, so that derivative is exactly zero.
    """
    fx = _dx(f, h)[:, 3:-3]
    ft = _dtheta(f)[1:-1]
    return np.stack([fx, ft, np.zeros_like(fx)], axis=2)


def _trim(f: np.ndarray) -> np.ndarray:
    return f[1:-1, 3:-3]


def nabla_ric_oracle(state: WarpedState) -> np.ndarray:
    """|nabla Ric|^2 at every node by explicit coordinate computation.

    Sphere topology: ghost nodes continue w oddly and psi evenly across the
    poles and the pole values are the symmetric limit 0.  Neck topology:
    the three end nodes on each side have no full stencil and are NaN.
    """
    _check_state(state, np.inf)
    n, h = state.n, state.grid.dx
    g_ = _X_GHOSTS
    if state.topology is Topology.SPHERE:
        w = np.concatenate([-state.w[g_:0:-1], state.w, -state.w[-2 : -g_ - 2 : -1]])
        psi = np.concatenate([state.psi[g_:0:-1], state.psi, state.psi[-2 : -g_ - 2 : -1]])
    else:
        w, psi = state.w, state.psi

    theta = np.pi / 2 + _DTHETA * np.arange(-9, 10)
    X, Th = w.size, theta.size
    g = np.zeros((X, Th, 3, 3))
    g[:, :, 0, 0] = psi[:, None] ** 2
    g[:, :, 1, 1] = w[:, None] ** 2
    g[:, :, 2, 2] = (w[:, None] * np.sin(theta)[None, :]) ** 2

    with np.errstate(divide="ignore", invalid="ignore"):
        # the chart degenerates at a pole; poison those entries so every
        # stencil that touches one yields NaN instead of a bogus value
        singular = w == 0.0
        g_safe = g.copy()
        g_safe[singular] = np.eye(3)
        ginv = np.linalg.inv(g_safe)
        ginv[singular] = np.nan
        dg = _grad(g, h)  # [.., c, a, b] = d_c g_ab
        gi1 = _trim(ginv)
        # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
        low = np.einsum("xtbdc->xtdbc", dg) + np.einsum("xtcdb->xtdbc", dg) - dg
        Gam = 0.5 * np.einsum("xtad,xtdbc->xtabc", gi1, low)

        dGam = _grad(Gam, h)  # [.., e, a, b, c] = d_e Gamma^a_bc
        G2 = _trim(Gam)
        # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
        Riem = (
            np.einsum("xtcadb->xtabcd", dGam)
            - np.einsum("xtdacb->xtabcd", dGam)
            + np.einsum("xtace,xtedb->xtabcd", G2, G2)
            - np.einsum("xtade,xtecb->xtabcd", G2, G2)
        )
        g2 = _trim(_trim(g))
        Rlow = np.einsum("xtae,xtebcd->xtabcd", g2, Riem)
        ric3 = np.einsum("xtabad->xtbd", Riem)

        def sec(a, b):
            den = g2[..., a, a] * g2[..., b, b] - g2[..., a, b] ** 2
            return Rlow[..., a, b, a, b] / den

        # sphere directions outside the chart: one more K0-plane for x,
        # one more K1-plane for each chart angle, n - 3 times
        extra = np.zeros_like(ric3)
        extra[..., 0, 0] = sec(0, 2) * g2[..., 0, 0]
        extra[..., 1, 1] = sec(1, 2) * g2[..., 1, 1]
        extra[..., 2, 2] = sec(1, 2) * g2[..., 2, 2]
        ric = ric3 + (n - 3) * extra

        dric = _grad(ric, h)  # [.., f, b, d] = d_f R_bd
        G3 = _trim(G2)
        ric_c = _trim(ric)
        nab = (
            dric
            - np.einsum("xtefb,xted->xtfbd", G3, ric_c)
            - np.einsum("xtefd,xtbe->xtfbd", G3, ric_c)
        )
        gi3 = _trim(_trim(_trim(ginv)))

    # only theta = pi/2 survives all three stencils
    nab = nab[:, 0]
    gi = gi3[:, 0]
    weights = _pattern_weights(n)
    total = np.zeros(nab.shape[0])
    for (a, b, c), wt in weights.items():
        if wt:
            total += wt * gi[:, a, a] * gi[:, b, b] * gi[:, c, c] * nab[:, a, b, c] ** 2

    out = np.full(state.grid.nodes, np.nan)
    if state.topology is Topology.SPHERE:
        inner = total[g_ - 3 : g_ - 3 + state.grid.nodes]
        out[:] = inner
        out[0] = out[-1] = 0.0
    else:
        out[3:-3] = total
    return out


def _pattern_weights(n: int) -> dict[tuple[int, int, int], float]:
    """Multiplicity of each chart index triple among all n-dim triples.

    Triples whose angle slots use one chart angle stand for the n - 1
    sphere directions, split evenly between theta and phi.  Triples that
    use both chart angles stand for the (n-1)(n-2) ordered pairs of
    distinct directions, again split over the two chart assignments.
    Triples with three distinct sphere directions vanish identically for
    a warped product and have no chart representative.
    """
    weights = {}
    for trip in itertools.product(range(3), repeat=3):
        angles = {i for i in trip if i > 0}
        if not angles:
            weights[trip] = 1.0
        elif len(angles) == 1:
            weights[trip] = (n - 1) / 2.0
        else:
            weights[trip] = (n - 1) * (n - 2) / 2.0
    return weights
