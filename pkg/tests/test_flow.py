import math
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import cylinder, dumbbell_profile, round_sphere
from ricci_lab import _kernels
from ricci_lab.config import ScenarioConfig
from ricci_lab.errors import InsufficientSnapshots, InvalidProfileParameters, SphereExtinct
from ricci_lab.flow import (
    STOP_PINCH,
    STOP_TIME,
    FlowHistory,
    StepControl,
    _blend,
    evolution_residuals,
    exact_cylinder_radius,
    exact_sphere,
    extinction_time,
    init_scenario,
    pinch_width,
    run,
    step,
    velocity,
)
from ricci_lab.geometry import Grid, Topology, WarpedState, curvature_sample, inj_lower_bound


def test_exact_sphere_examples():
    assert exact_sphere(3, 1.0, 0.0).w.max() == pytest.approx(1.0, abs=1e-12)
    s = exact_sphere(3, 1.0, 0.125)
    assert s.psi[0] == pytest.approx(np.pi * math.sqrt(0.5))
    c = curvature_sample(exact_sphere(3, 1.0, 0.125, Grid(400)))
    np.testing.assert_allclose(c.K0, 2.0, rtol=1e-4)
    np.testing.assert_allclose(c.K1, 2.0, rtol=1e-4)
    assert extinction_time(4, 1.0) == pytest.approx(1 / 6)
    exact_sphere(4, 1.0, 1 / 6 - 1e-9)
    with pytest.raises(SphereExtinct):
        exact_sphere(4, 1.0, 1 / 6)


def test_init_profiles():
    c = curvature_sample(init_scenario(ScenarioConfig(nodes=400)))
    np.testing.assert_allclose(c.K0, 1.0, atol=2e-5)
    np.testing.assert_allclose(c.K1, 1.0, atol=2e-5)
    flat = init_scenario(ScenarioConfig(profile="dumbbell", neck_amp=0.0, nodes=128))
    round_ = init_scenario(ScenarioConfig(nodes=128))
    np.testing.assert_array_equal(flat.w, round_.w)
    np.testing.assert_array_equal(flat.psi, round_.psi)
    neck = init_scenario(ScenarioConfig(profile="dumbbell", nodes=400))
    mid = neck.grid.N // 2
    assert neck.w[mid] < neck.w[mid - 1] and neck.w[mid] < neck.w[mid + 1]
    assert inj_lower_bound(neck, curvature_sample(neck)) < np.pi
    # config validation already rejects these; the profile builder checks on its own
    for profile, amp in (("dumbbell", 1.2), ("cylinder_caps", -0.1), ("trumpet", 0.0)):
        raw = SimpleNamespace(nodes=64, n=3, r0=1.0, profile=profile, neck_amp=amp, neck_width=0.1)
        with pytest.raises(InvalidProfileParameters):
            init_scenario(raw)


def test_kernel_matches_numpy_reference():
    for state in (
        dumbbell_profile(128),
        init_scenario(ScenarioConfig(topology="neck", profile="cylinder_caps", nodes=128)),
    ):
        ref_w, ref_p = velocity(state, state.w, state.psi)
        size = state.grid.nodes
        wt, pt, K0, K1, ws = (np.empty(size) for _ in range(5))
        _kernels.velocity_into(
            state.w, state.psi, state.grid.dx, _blend(state.grid), state.topology is Topology.SPHERE,
            state.n, wt, pt, K0, K1, ws,
        )
        np.testing.assert_allclose(wt, ref_w, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref_w)))
        np.testing.assert_allclose(pt, ref_p, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref_p)))


@pytest.mark.parametrize("n", [3, 4])
def test_single_step_matches_discrete_round_solution(n):
    # the discrete sphere stays round and shrinks with its own curvature c_h
    state = round_sphere(200, n)
    c_h = float(np.mean(curvature_sample(state).K0[1:-1]))
    dt = 1e-5
    after = step(state, dt)
    r = math.sqrt(1 - 2 * (n - 1) * c_h * dt)
    np.testing.assert_allclose(after.w, r * state.w, rtol=0, atol=1e-12)
    np.testing.assert_allclose(after.psi, r * state.psi, rtol=1e-12)


def test_flat_annulus_interior_is_fixed():
    g = Grid(64)
    flat = WarpedState(g, 3, 0.0, np.ones(g.nodes), 1 + g.x, Topology.NECK)
    after = step(flat, 1e-5)
    # the even reflection bends the two ends; the interior is Ricci flat
    np.testing.assert_allclose(after.w[4:-4], flat.w[4:-4], rtol=0, atol=1e-13)
    np.testing.assert_allclose(after.psi[4:-4], flat.psi[4:-4], rtol=0, atol=1e-13)


def test_cylinder_shrinks_uniformly():
    rho = 1.3
    state = cylinder(128, n=3, rho=rho)
    dt = 1e-6
    after = step(state, dt)
    np.testing.assert_allclose((after.w - state.w) / dt, -1 / rho, rtol=1e-5)
    np.testing.assert_array_equal(after.psi, state.psi)


def test_cylinder_run_follows_closed_form(cylinder_history):
    for state in cylinder_history.states:
        np.testing.assert_allclose(state.w, exact_cylinder_radius(3, 1.0, state.t), rtol=1e-10)


def test_sphere_run_error_and_order():
    errs = []
    for N in (100, 200, 400):
        h = run(ScenarioConfig(nodes=N, t_end=0.2))
        assert h.stop_reason == STOP_TIME
        exact = exact_sphere(3, 1.0, h.T_end, Grid(N))
        errs.append(np.max(np.abs(h.states[-1].w - exact.w)) / np.max(exact.w))
    assert errs[-1] < 1e-3
    assert 3.4 < errs[0] / errs[1] < 4.6
    assert 3.4 < errs[1] / errs[2] < 4.6


def test_sphere_run_properties(sphere_history):
    h = sphere_history
    assert h.states[0].t == 0.0
    assert np.all(np.diff(h.times) > 0)
    assert h.T_end == pytest.approx(0.2, abs=1e-12)
    Rmax = []
    for state, c in h.snapshots:
        assert np.ptp(c.R) < 1e-8 * np.max(c.R)
        r = math.sqrt(1 - 4 * state.t)
        assert state.length == pytest.approx(np.pi * r, rel=2e-4)
        Rmax.append(np.max(c.R))
    assert np.all(np.diff(Rmax) > 0)
    assert h.K_bar == max(np.max(c.ric_norm) for c in h.samples)
    assert h.Lambda0 == np.max(h.samples[0].rm_norm)


def test_sphere_pinch_before_extinction():
    # the discrete extinction time 1/(4 c_h) sits within (pi h)^2/48 of 1/4
    h = run(ScenarioConfig(nodes=128, t_end=0.3))
    assert h.stop_reason == STOP_PINCH
    assert h.T_end < 0.25
    assert pinch_width(h.states[-1]) < 1e-2


def test_dumbbell_curvature_exceeds_round(dumbbell_history):
    assert dumbbell_history.K_bar > 2.0


def test_determinism():
    cfg = ScenarioConfig(profile="dumbbell", nodes=96, t_end=0.01)
    a, b = run(cfg), run(cfg)
    assert len(a) == len(b)
    for (sa, _), (sb, _) in zip(a.snapshots, b.snapshots):
        assert sa.t == sb.t
        np.testing.assert_array_equal(sa.w, sb.w)
        np.testing.assert_array_equal(sa.psi, sb.psi)


def test_residuals_second_order():
    meds = {"sphere": [], "cyl": []}
    for N in (100, 200, 400):
        meds["sphere"].append(evolution_residuals(run(ScenarioConfig(nodes=N, t_end=0.1))).overall_median)
        cyl = ScenarioConfig(topology="neck", profile="cylinder_caps", neck_amp=0.2, nodes=N, t_end=0.1)
        meds["cyl"].append(evolution_residuals(run(cyl)).overall_median)
    for series in meds.values():
        assert series[-1] < 5e-2
        assert series[0] / series[1] > 3.4 and series[1] / series[2] > 3.4


def test_residuals_need_three_snapshots():
    state = round_sphere(64)
    with pytest.raises(InsufficientSnapshots):
        evolution_residuals(FlowHistory.from_states([state]))


def test_step_control():
    with pytest.raises(ValueError):
        StepControl(sigma_cfl=0.6)
    with pytest.raises(ValueError):
        StepControl(dt_min=1.0, dt_max=0.1)
    c = StepControl(sigma_cfl=0.2)
    s = round_sphere(100)
    assert c.dt(s) == pytest.approx(0.2 * (np.pi / 100) ** 2)
