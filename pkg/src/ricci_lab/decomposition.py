"""Orthogonal splitting of a candidate nabla Ric into its trace part and the rest.

For a symmetric-in-(j,k) three-tensor T_ijk with the contracted Bianchi
identities g^{jk} T_ijk = dR_i and 2 g^{ij} T_ijk = dR_k, the trace part

    E_ijk = a (g_ij dR_k + g_ik dR_j) + b g_jk dR_i

with a = (n - 2)/(2n^2 + 2n - 4) and b = 1/2 - a(n + 1) leaves a
remainder F = T - E that is trace-free in every pair of slots and
orthogonal to E.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BianchiViolation, DimensionTooSmall

BIANCHI_TOL = 1e-8


@dataclass(frozen=True)
class DecompositionConstants:
    n: int
    a_exact: Fraction
    b_exact: Fraction

    @property
    def a(self) -> float:
        return float(self.a_exact)

    @property
    def b_dec(self) -> float:
        return float(self.b_exact)

    @property
    def norm_factor(self) -> float:
        """|E|^2 / |dR|^2."""
        return float(self.a_exact + self.b_exact)


def decomposition_constants(n: int) -> DecompositionConstants:
    if n < 2:
        raise DimensionTooSmall(f"need n >= 2, got {n}")
    a = Fraction(n - 2, 2 * n * n + 2 * n - 4)
    b = Fraction(1, 2) - a * (n + 1)
    return DecompositionConstants(n, a, b)


@dataclass(frozen=True, eq=False)
class PointTensorInstance:
    g: np.ndarray  # (n, n) metric
    T: np.ndarray  # (n, n, n), T[i, j, k] = nabla_i R_jk
    dR: np.ndarray  # (n,)

    @property
    def n(self) -> int:
        return self.g.shape[0]


def inner(g_inv: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    """<A, B> for three-tensors with every index raised by g."""
    return float(np.einsum("ijk,lmn,il,jm,kn->", A, B, g_inv, g_inv, g_inv, optimize=True))


def traces(g_inv: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(g^{ij} X_ijk, g^{jk} X_ijk, g^{ik} X_ijk)."""
    return (
        np.einsum("ij,ijk->k", g_inv, X),
        np.einsum("jk,ijk->i", g_inv, X),
        np.einsum("ik,ijk->j", g_inv, X),
    )


def bianchi_defect(inst: PointTensorInstance) -> float:
    g_inv = np.linalg.inv(inst.g)
    t_ij, t_jk, _ = traces(g_inv, inst.T)
    sym = np.max(np.abs(inst.T - np.swapaxes(inst.T, 1, 2)))
    return float(max(np.max(np.abs(t_jk - inst.dR)), np.max(np.abs(2 * t_ij - inst.dR)), sym))


def trace_part(g: np.ndarray, dR: np.ndarray, consts: DecompositionConstants) -> np.ndarray:
    a, b = consts.a, consts.b_dec
    return (
        a * (np.einsum("ij,k->ijk", g, dR) + np.einsum("ik,j->ijk", g, dR))
        + b * np.einsum("jk,i->ijk", g, dR)
    )


def decompose(inst: PointTensorInstance, tol: float = BIANCHI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Return (E, F) with T = E + F.

    Raises BianchiViolation (carrying the measured defect) when the input
    misses the contracted Bianchi identities by more than tol * |T|.
    """
    n = inst.n
    if inst.T.shape != (n, n, n) or inst.dR.shape != (n,):
        raise ValueError("tensor shapes do not match the metric")
    consts = decomposition_constants(n)
    scale = float(np.linalg.norm(inst.T))
    defect = bianchi_defect(inst)
    if defect > tol * max(scale, np.finfo(float).tiny):
        if scale > 0 or defect > 0:
            raise BianchiViolation(defect, scale)
    E = trace_part(inst.g, inst.dR, consts)
    return E, inst.T - E


@dataclass(frozen=True)
class DecompositionReport:
    trace_F: float  # largest trace of F, relative to |T|
    inner_EF: float  # <E, F> relative to |T|^2
    pythagoras: float  # |T|^2 - |E|^2 - |F|^2 relative to |T|^2
    norm_E: float  # |E|^2 - (a + b)|dR|^2 relative to |T|^2

    @property
    def worst(self) -> float:
        return max(abs(self.trace_F), abs(self.inner_EF), abs(self.pythagoras), abs(self.norm_E))


def check_identities(inst: PointTensorInstance, tol: float = BIANCHI_TOL) -> DecompositionReport:
    E, F = decompose(inst, tol)
    g_inv = np.linalg.inv(inst.g)
    consts = decomposition_constants(inst.n)
    tt = inner(g_inv, inst.T, inst.T)
    scale = max(np.sqrt(tt), np.finfo(float).tiny)
    ee, ff, ef = inner(g_inv, E, E), inner(g_inv, F, F), inner(g_inv, E, F)
    dr2 = float(inst.dR @ g_inv @ inst.dR)
    tr = max(float(np.max(np.abs(v))) for v in traces(g_inv, F))
    return DecompositionReport(
        trace_F=tr / scale,
        inner_EF=ef / scale**2,
        pythagoras=(tt - ee - ff) / scale**2,
        norm_E=(ee - consts.norm_factor * dr2) / scale**2,
    )


# ---------------------------------------------------------------------------
# rotationally symmetric Bianchi inequality


@dataclass(frozen=True)
class BianchiMargin:
    margin: np.ndarray  # NaN where the hypothesis fails
    margin_full: np.ndarray  # same with the full covariant norm, diagnostic only
    min_margin: float
    hypothesis_failures: np.ndarray  # node indices
    strong_checked: bool
    strong_slack: float  # min of factor*|dR| - |nabla Ric| (nan if unchecked)
    ok: bool


def rot_sym_bianchi_check(sample, n: int, C: float = 0.0, tol: float = 1e-10) -> BianchiMargin:
    """Check the warped-product Bianchi inequality node by node.

    Where dK0 * dK1 >= -C^2/((n-1)^2 - 1), the margin
    (1/4 + 1/(4(n-1)^2)) |dR|^2 + (n-2) C^2 - nabla_ric_paper must be >= -tol.
    With C = 0 and the hypothesis holding everywhere, the strong form
    sqrt(nabla_ric_paper) <= n/(2(n-1)) |dR| is checked too.
    """
    if n < 3:
        raise DimensionTooSmall("the hypothesis denominator (n-1)^2 - 1 vanishes for n < 3")
    m = n - 1
    prod = sample.dK0 * sample.dK1
    holds = prod >= -(C * C) / (m * m - 1)
    base = (0.25 + 0.25 / (m * m)) * sample.nabla_R_sq + (n - 2) * C * C
    margin = np.where(holds, base - sample.nabla_ric_paper, np.nan)
    margin_full = np.where(holds, base - sample.nabla_ric_full, np.nan)
    min_margin = float(np.nanmin(margin)) if np.any(holds) else float("nan")
    ok = bool(not np.any(holds) or min_margin >= -tol)
    strong_checked = C == 0 and bool(np.all(holds))
    slack = float("nan")
    if strong_checked:
        factor = n / (2 * m)
        slack_arr = factor * np.sqrt(sample.nabla_R_sq) - np.sqrt(sample.nabla_ric_paper)
        slack = float(np.min(slack_arr))
        ok = ok and slack >= -tol * max(1.0, float(np.max(np.sqrt(sample.nabla_R_sq))))
    return BianchiMargin(
        margin=margin,
        margin_full=margin_full,
        min_margin=min_margin,
        hypothesis_failures=np.flatnonzero(~holds),
        strong_checked=strong_checked,
        strong_slack=slack,
        ok=ok,
    )
