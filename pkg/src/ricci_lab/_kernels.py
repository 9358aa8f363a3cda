"""Compiled RK4 stepping for the reduced flow.

Mirrors ``flow.velocity`` (the NumPy reference) node by node; the tests
compare the two.  Runs of 10^5 - 10^6 steps are dominated by per-call
overhead in NumPy, hence the loop lives here.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_RUNNING = 0
STATUS_TIME = 1
STATUS_PINCH = 2
STATUS_BLOWUP = 3


@njit(cache=True)
def velocity_into(w, psi, h, blend, sphere, n, wt, pt, K0, K1, ws):
    N = w.size - 1
    for i in range(N + 1):
        if i == 0:
            wm = 2.0 * w[0] - w[1] if sphere else w[1]
            pm = psi[1]
        else:
            wm = w[i - 1]
            pm = psi[i - 1]
        if i == N:
            wp = 2.0 * w[N] - w[N - 1] if sphere else w[N - 1]
            pp = psi[N - 1]
        else:
            wp = w[i + 1]
            pp = psi[i + 1]
        w_x = (wp - wm) / (2.0 * h)
        w_xx = (wp - 2.0 * w[i] + wm) / (h * h)
        psi_x = (pp - pm) / (2.0 * h)
        p = psi[i]
        ws[i] = w_x / p
        w_ss = (w_xx - psi_x / p * w_x) / (p * p)
        wt[i] = w_ss  # completed below
        if sphere:
            if 0 < i < N:
                K0[i] = -w_ss / w[i]
        else:
            K0[i] = -w_ss / w[i]
            K1[i] = (1.0 - ws[i] * ws[i]) / (w[i] * w[i])
    if sphere:
        K0[0] = K0[1]
        K0[N] = K0[N - 1]
        # integral form of K1 from each pole, blended across the middle
        left = 0.0
        K1[0] = K0[0]
        for i in range(1, N):
            left += 0.5 * (K0[i] + K0[i - 1]) * (w[i] * w[i] - w[i - 1] * w[i - 1])
            K1[i] = (1.0 - blend[i]) * left
        right = 0.0
        K1[N] = K0[N]
        for i in range(N - 1, 0, -1):
            right -= 0.5 * (K0[i + 1] + K0[i]) * (w[i + 1] * w[i + 1] - w[i] * w[i])
            K1[i] = (K1[i] + blend[i] * right) / (w[i] * w[i])
    for i in range(N + 1):
        wt[i] = wt[i] - (n - 2) * K1[i] * w[i]
        pt[i] = -(n - 1) * K0[i] * psi[i]
    if sphere:
        wt[0] = 0.0
        wt[N] = 0.0


@njit(cache=True)
def _pinch_width(w):
    N = w.size - 1
    width = w[0]
    for i in range(1, N + 1):
        if w[i] > width:
            width = w[i]
    for i in range(1, N):
        if w[i] < w[i - 1] and w[i] < w[i + 1] and w[i] < width:
            width = w[i]
    return width


@njit(cache=True)
def rk4_into(w, psi, dt, h, blend, sphere, n, w_out, psi_out, buf):
    """One RK4 step from (w, psi) into (w_out, psi_out); returns False on blowup."""
    N1 = w.size
    k1w, k1p, k2w, k2p, k3w, k3p, k4w, k4p, tw, tp, K0, K1, ws = buf
    velocity_into(w, psi, h, blend, sphere, n, k1w, k1p, K0, K1, ws)
    for i in range(N1):
        tw[i] = w[i] + 0.5 * dt * k1w[i]
        tp[i] = psi[i] + 0.5 * dt * k1p[i]
    velocity_into(tw, tp, h, blend, sphere, n, k2w, k2p, K0, K1, ws)
    for i in range(N1):
        tw[i] = w[i] + 0.5 * dt * k2w[i]
        tp[i] = psi[i] + 0.5 * dt * k2p[i]
    velocity_into(tw, tp, h, blend, sphere, n, k3w, k3p, K0, K1, ws)
    for i in range(N1):
        tw[i] = w[i] + dt * k3w[i]
        tp[i] = psi[i] + dt * k3p[i]
    velocity_into(tw, tp, h, blend, sphere, n, k4w, k4p, K0, K1, ws)
    ok = True
    for i in range(N1):
        w_out[i] = w[i] + dt / 6.0 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i])
        psi_out[i] = psi[i] + dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i])
        if not (np.isfinite(w_out[i]) and np.isfinite(psi_out[i]) and psi_out[i] > 0.0):
            ok = False
    if sphere:
        w_out[0] = 0.0
        w_out[N1 - 1] = 0.0
    return ok


def make_buffers(size: int):
    return tuple(np.empty(size) for _ in range(13))


@njit(cache=True)
def advance(w, psi, t, n, h, blend, sphere, sigma, dt_min, dt_max, t_end, tol, floor, max_steps, buf, w_new, p_new):
    """Take up to ``max_steps`` steps in place.

    Returns (t, steps_taken, status).  On STATUS_PINCH the pinching step
    has been accepted; on STATUS_BLOWUP the failed step has not.
    """
    steps = 0
    while steps < max_steps:
        if t_end - t <= tol:
            return t, steps, STATUS_TIME
        pmin = psi[0]
        for i in range(psi.size):
            if psi[i] < pmin:
                pmin = psi[i]
        dt = sigma * (pmin * h) ** 2
        dt = min(max(dt, dt_min), dt_max)
        dt = min(dt, t_end - t)
        if not rk4_into(w, psi, dt, h, blend, sphere, n, w_new, p_new, buf):
            return t, steps, STATUS_BLOWUP
        w[:] = w_new
        psi[:] = p_new
        t += dt
        steps += 1
        if _pinch_width(w) < floor:
            return t, steps, STATUS_PINCH
    if t_end - t <= tol:
        return t, steps, STATUS_TIME
    return t, steps, STATUS_RUNNING
