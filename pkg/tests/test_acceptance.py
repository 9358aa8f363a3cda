"""Acceptance criteria 1-10, one PASS/FAIL line each.

The lines are printed as the tests run (visible with ``-s``) and repeated
in the terminal summary.  Run ``pytest tests/test_acceptance.py -s``.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from ricci_lab.barrier import build_cutoff, gauge_shrink_history, lemma_a_margins, lemma_b_track
from ricci_lab.config import ScenarioConfig
from ricci_lab.decomposition import check_identities, decomposition_constants, rot_sym_bianchi_check
from ricci_lab.errors import NoViolation
from ricci_lab.flow import STOP_PINCH, STOP_TIME, evolution_residuals, exact_sphere, run
from ricci_lab.geometry import Grid, curvature_sample
from ricci_lab.instances import monotone_curvature_profile, random_instance
from ricci_lab.monitors import MonitorParams, rescale, summary
from ricci_lab.outputs import emit_outputs, load_snapshots, series_csv
from ricci_lab.picking import JUMP_FACTOR, PickParams, ladder_field, pick_point, synthetic_field, verify_pick
from ricci_lab.scenario import run_scenario

RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}"
    RESULTS[number] = line
    print("\n" + line)
    assert ok, line


def test_criterion_01_exact_sphere():
    errs, runtime = [], math.nan
    run(ScenarioConfig(nodes=64, t_end=1e-3))  # compile the kernel outside the timing
    for N in (100, 200, 400):
        start = time.perf_counter()
        h = run(ScenarioConfig(nodes=N, t_end=0.2))
        if N == 400:
            runtime = time.perf_counter() - start
        exact = exact_sphere(3, 1.0, h.T_end, Grid(N))
        errs.append(float(np.max(np.abs(h.states[-1].w - exact.w)) / np.max(exact.w)))
        assert h.stop_reason == STOP_TIME
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = errs[-1] < 1e-3 and all(3.4 <= r <= 4.6 for r in ratios) and runtime < 30
    record(
        1,
        "shrinking sphere",
        ok,
        f"rel err N=400 {errs[-1]:.3e} (< 1e-3), ratios {ratios[0]:.3f}, {ratios[1]:.3f} (in [3.4, 4.6]), "
        f"runtime {runtime:.2f} s (< 30 s)",
    )


def test_criterion_02_evolution_residual():
    cases = {
        "sphere": lambda N: ScenarioConfig(nodes=N, t_end=0.1),
        "cylinder": lambda N: ScenarioConfig(
            topology="neck", profile="cylinder_caps", neck_amp=0.2, nodes=N, t_end=0.1
        ),
    }
    ok, parts = True, []
    for name, make in cases.items():
        meds = [evolution_residuals(run(make(N))).overall_median for N in (100, 200, 400)]
        ratios = [meds[0] / meds[1], meds[1] / meds[2]]
        ok &= meds[-1] < 5e-2 and all(r >= 3.4 for r in ratios)
        parts.append(f"{name} median N=400 {meds[-1]:.2e}, ratios {ratios[0]:.1f}, {ratios[1]:.1f}")
    record(2, "scalar curvature evolution residual", ok, "; ".join(parts) + " (< 5e-2, ratios >= 3.4)")


def test_criterion_03_decomposition_identities():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in range(2, 9):
        for _ in range(1000):
            worst = max(worst, check_identities(random_instance(rng, n)).worst)
    c3, c4 = decomposition_constants(3), decomposition_constants(4)
    exact = (c3.a_exact, c3.b_exact, c4.a_exact, c4.b_exact) == (
        Fraction(1, 20),
        Fraction(3, 10),
        Fraction(1, 18),
        Fraction(2, 9),
    )
    ok = worst < 1e-10 and exact
    record(
        3,
        "trace decomposition identities",
        ok,
        f"7000 instances, worst relative defect {worst:.2e} (< 1e-10); "
        f"constants n=3 {c3.a_exact}, {c3.b_exact}; n=4 {c4.a_exact}, {c4.b_exact}",
    )


def test_criterion_04_rotationally_symmetric_bianchi():
    rng = np.random.default_rng(7)
    worst, strong = math.inf, 0
    for k in range(200):
        n = 3 + k % 6
        c = curvature_sample(monotone_curvature_profile(rng, n))
        assert np.all(c.dK0 * c.dK1 >= 0)
        rep = rot_sym_bianchi_check(c, n)
        strong += rep.strong_checked
        worst = min(worst, rep.min_margin)
    ok = worst >= -1e-10 and strong == 200
    record(4, "strong Bianchi bound on monotone profiles", ok, f"200 profiles n=3..8, min margin {worst:.3e} (>= -1e-10)")


def test_criterion_05_point_picking():
    rng = np.random.default_rng(99)
    ok, counts, max_iter = True, {}, 0
    for mode in ("global", "local"):
        picks = 0
        while picks < 100:
            f = synthetic_field(rng)
            params = PickParams(alpha=1e-3, mode=mode)
            try:
                res = pick_point(f, params)
            except NoViolation:
                continue
            picks += 1
            qs = [q for _, _, q in res.trace]
            ok &= all(b > JUMP_FACTOR * a for a, b in zip(qs, qs[1:]))
            ok &= verify_pick(f, res, params).ok and res.ok
            max_iter = max(max_iter, res.iterations)
        # planted ladders make sure long escalations are exercised too
        for k in range(100):
            f, start = ladder_field(rng, mode=mode, rungs=1 + k % 6)
            params = PickParams(alpha=1e-3, mode=mode, start=start)
            res = pick_point(f, params)
            qs = [q for _, _, q in res.trace]
            ok &= res.iterations == 1 + k % 6
            ok &= all(b > JUMP_FACTOR * a for a, b in zip(qs, qs[1:]))
            ok &= verify_pick(f, res, params).ok and res.ok
            max_iter = max(max_iter, res.iterations)
        counts[mode] = picks
    record(
        5,
        "point picking",
        ok,
        f"{counts['global']}+100 global and {counts['local']}+100 local fields verified, "
        f"longest escalation {max_iter}",
    )


def test_criterion_06_lemma_a():
    ok = all(lemma_a_margins(n, float(th)).ok for n in range(2, 11) for th in np.round(np.arange(0.1, 1.0, 0.1), 1))
    mc = lemma_a_margins(3, 0.5).margin_c_exact
    md = lemma_a_margins(3, 0.5).margin_d_exact
    ok &= mc == 50 and md == Fraction(3, 2)
    record(6, "barrier constant margins", ok, f"all 81 (n, theta1) positive; margin_c(3) = {mc}, margin_d(0.5) = {md}")


def test_criterion_07_lemma_b(sphere_history):
    cut = build_cutoff(sphere_history.states[0], 1.0)
    on_sphere = lemma_b_track(sphere_history, cut)
    K = 5.0
    model = lemma_b_track(gauge_shrink_history(sphere_history.states[0], K, 0.2), cut, K=K, A=cut.A_grad)
    expected = math.log(2) / (2 * K)
    hit = model.first_grad_violation
    ok = on_sphere.within_bound and hit is not None and abs(hit - expected) <= 0.05 * expected
    record(
        7,
        "cutoff gradient growth",
        ok,
        f"sphere within A^2 e^(2Kt): {on_sphere.within_bound}; gauge-shrink first 2A^2 time "
        f"{hit:.5f} vs ln2/(2K) = {expected:.5f}",
    )


def test_criterion_08_scale_invariance(dumbbell_history):
    base = summary(dumbbell_history)
    worst = 0.0
    for c in (0.01, 0.25, 3.0, 4.0, 100.0):
        s = summary(rescale(dumbbell_history, c))
        for name in ("shi_ratio_max", "rm_ratio_max", "shig_ratio_max", "taming_early"):
            a, b = getattr(base, name), getattr(s, name)
            worst = max(worst, abs(a - b) / abs(a))
        worst = max(worst, abs(s.K_bar * c - base.K_bar) / base.K_bar)
    record(8, "monitor scale invariance", worst < 1e-8, f"worst relative change {worst:.2e} (< 1e-8)")


@pytest.mark.slow
def test_criterion_09_shi_ratio_stability():
    rows = []
    for N in (200, 400, 800):
        # same physical snapshot times at every resolution
        cfg = ScenarioConfig(profile="dumbbell", nodes=N, t_end=1.0, snapshot_every=64 * (N // 200) ** 2)
        h = run(cfg)
        assert h.stop_reason == STOP_PINCH
        s = summary(h)
        rows.append((N, s.shi_ratio_max, s.taming_max, h.T_end))
    shi = [r[1] for r in rows]
    tam = [r[2] for r in rows]
    spread_shi = (max(shi) - min(shi)) / min(shi)
    spread_tam = (max(tam) - min(tam)) / min(tam)
    ok = spread_shi <= 0.1 and spread_tam <= 0.1
    detail = ", ".join(f"N={N}: shi {a:.4e} taming {b:.4f} pinch t {t:.5f}" for N, a, b, t in rows)
    record(9, "shi ratio stability to the pinch", ok, f"{detail}; spreads {spread_shi:.2%}, {spread_tam:.2%} (<= 10%)")


def test_criterion_10_determinism_round_trip(tmp_path):
    cfg = ScenarioConfig(name="det", profile="dumbbell", nodes=128, t_end=0.05, snapshot_every=32)
    paths = []
    for tag in ("a", "b"):
        history, report = run_scenario(cfg)
        paths.append(emit_outputs(history, report, tmp_path / tag))
    same = all(paths[0][k].read_bytes() == paths[1][k].read_bytes() for k in ("series", "snapshots"))
    again = load_snapshots(paths[0]["snapshots"], cfg.n, cfg.topology, cfg)
    rebuilt = series_csv(summary(again, MonitorParams.from_config(cfg)).rows)
    round_trip = rebuilt == paths[0]["series"].read_text()
    record(10, "determinism and round trip", same and round_trip, f"byte-identical reruns: {same}; reload rebuilds series.csv: {round_trip}")
