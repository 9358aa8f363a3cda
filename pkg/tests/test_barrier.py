import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import round_sphere
from ricci_lab.barrier import (
    MEASURE_FLOOR,
    barrier_params,
    build_cutoff,
    cutoff_derivatives,
    gauge_shrink_history,
    lemma_a_margins,
    lemma_b_track,
    shil_quantities,
)
from ricci_lab.errors import HorizonExceeded, RadiusTooLarge, RangeError
from ricci_lab.flow import FlowHistory


def test_cutoff_shape():
    s = round_sphere(400)
    cut = build_cutoff(s, 1.0)
    mid = s.grid.N // 2
    assert cut.chi[mid] == 1.0
    assert cut.plateau == pytest.approx(1 / math.sqrt(2))
    d = np.abs(s.arc_length - cut.centre)
    np.testing.assert_array_equal(cut.chi[d <= cut.plateau], 1.0)
    np.testing.assert_array_equal(cut.chi[d >= 1.0], 0.0)
    assert np.all((cut.chi >= 0) & (cut.chi <= 1.0))
    assert cut.A_measured > 1


def test_cutoff_constant_is_grid_independent():
    a = build_cutoff(round_sphere(200), 1.2)
    b = build_cutoff(round_sphere(400), 1.2)
    assert b.A_grad == pytest.approx(a.A_grad, rel=0.02)
    assert b.A_hess == pytest.approx(a.A_hess, rel=0.02)


def test_cutoff_derivatives_match_finite_differences():
    s = round_sphere(800)
    cut = build_cutoff(s, 1.0)
    chi_s, _ = cutoff_derivatives(s, cut)
    fd = np.gradient(cut.chi, s.arc_length)
    np.testing.assert_allclose(chi_s[2:-2], fd[2:-2], atol=5e-3 * np.max(np.abs(chi_s)))


def test_cutoff_radius_limits():
    s = round_sphere(128)
    with pytest.raises(RadiusTooLarge):
        build_cutoff(s, 0.5 * s.length)
    with pytest.raises(RadiusTooLarge):
        build_cutoff(s, 0.0)


def test_static_metric_keeps_cutoff_derivatives():
    s = round_sphere(200)
    cut = build_cutoff(s, 1.0)
    static = FlowHistory.from_states([s.replace(t=t) for t in (0.0, 0.1, 0.2, 0.3)])
    series = lemma_b_track(static, cut, K=1.0)
    assert np.ptp(series.grad_sq) == 0.0 and np.ptp(series.hess_prod) == 0.0
    assert series.within_bound and series.first_violation is None


def test_lemma_b_on_sphere_run(sphere_history):
    cut = build_cutoff(sphere_history.states[0], 1.0)
    series = lemma_b_track(sphere_history, cut)
    assert series.within_bound
    assert np.all(np.diff(series.grad_sq) >= 0)


def test_gauge_shrink_violation_time():
    K = 5.0
    s = round_sphere(200)
    cut = build_cutoff(s, 1.0)
    series = lemma_b_track(gauge_shrink_history(s, K, 0.2), cut, K=K, A=cut.A_grad)
    # |grad chi|^2 = A^2 e^{2 K t} reaches 2 A^2 at ln 2 / (2K)
    expected = math.log(2) / (2 * K)
    assert series.first_grad_violation == pytest.approx(expected, rel=0.05)
    np.testing.assert_allclose(series.grad_sq, series.bound, rtol=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_lemma_a_margins_grid(n):
    for theta in np.linspace(0.1, 0.9, 9):
        m = lemma_a_margins(n, float(theta))
        assert m.ok and m.margin_c > 0 and m.margin_d > 0
        assert m.c == 14 + 4 * n


def test_lemma_a_reference_values():
    assert lemma_a_margins(3, 0.5).margin_c_exact == 50
    assert lemma_a_margins(3, 0.5).margin_d_exact == Fraction(3, 2)
    assert lemma_a_margins(7, 0.5).margin_d_exact == Fraction(3, 2)
    with pytest.raises(ValueError):
        lemma_a_margins(3, 1.0)
    with pytest.raises(ValueError):
        lemma_a_margins(1, 0.5)


def test_barrier_params():
    p = barrier_params(3, 0.5, 2.0, C1=1.0, C2=1.0)
    assert p.B_min == 288 and p.B_const == 289
    assert p.b_F == pytest.approx(1 / (4 * 289**2))
    assert barrier_params(3, 0.5, 2.0, C1=1.0, C2=8.0).b_F == pytest.approx(1 / (8 * 289**2))
    with pytest.raises(RangeError):
        barrier_params(3, 0.5, 2.0, C1=1.0, C2=1.0, B_const=100.0)
    with pytest.raises(ValueError):
        barrier_params(3, 0.5, 2.0, C1=0.0, C2=1.0)


def test_shil_on_sphere(sphere_history):
    cut = build_cutoff(sphere_history.states[0], 1.0)
    rep = shil_quantities(sphere_history, cut)
    assert rep.barrier_holds
    # grad R vanishes on a round sphere, so F is round-off
    assert np.max(rep.F_max) < 1e-12 * np.min(rep.H_min)
    assert rep.params.C1 >= MEASURE_FLOOR and rep.params.C2 >= MEASURE_FLOOR
    assert np.all(rep.times <= rep.horizon * (1 + 1e-12))


def test_shil_on_dumbbell(dumbbell_history):
    cut = build_cutoff(dumbbell_history.states[0], 1.0)
    rep = shil_quantities(dumbbell_history, cut)
    assert rep.barrier_holds and rep.margin_min > 0
    assert np.isfinite(rep.C1_measured) and np.isfinite(rep.C2_measured)
    assert rep.C_fit > 0


def test_shil_horizon(sphere_history):
    cut = build_cutoff(sphere_history.states[0], 1.0)
    with pytest.raises(HorizonExceeded):
        shil_quantities(FlowHistory.from_states(sphere_history.states[:1]), cut)
