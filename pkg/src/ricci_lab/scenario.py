"""Run one scenario end to end and collect every check into a RunReport."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from . import barrier, monitors, picking
from .config import ScenarioConfig
from .errors import HorizonExceeded, InsufficientSnapshots, NoViolation
from .flow import STOP_FAILURE, FlowHistory, ResidualStats, evolution_residuals, run


@dataclass(frozen=True)
class Skipped:
    reason: str


@dataclass(frozen=True)
class RunReport:
    config: ScenarioConfig
    stop_reason: str
    duration: float
    summary: monitors.MonitorSummary
    residuals: ResidualStats | Skipped
    pick: picking.PickResult | Skipped
    pick_check: picking.PickVerification | Skipped
    lemma_a: barrier.LemmaAMargins
    lemma_b: barrier.LemmaBSeries | Skipped
    shil: barrier.ShilReport | Skipped
    h_check: monitors.HReport
    failures: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


def analyse(history: FlowHistory, config: ScenarioConfig, duration: float = math.nan) -> RunReport:
    params = monitors.MonitorParams.from_config(config)
    summary = monitors.summary(history, params)
    failures = []
    if history.stop_reason == STOP_FAILURE:
        failures.append("flow stopped on a numerical failure")

    try:
        residuals = evolution_residuals(history)
    except InsufficientSnapshots as exc:
        residuals = Skipped(str(exc))

    pick_params = picking.PickParams(
        alpha=config.pick_alpha, eta=config.eta, mode=config.pick_mode, epsilon=config.pick_epsilon
    )
    try:
        pick = picking.pick_point(history, pick_params)
        pick_check = picking.verify_pick(history, pick, pick_params)
        if not pick_check.ok:
            failures.append("point picking failed its independent check")
    except NoViolation as exc:
        pick = pick_check = Skipped(str(exc))

    lemma_a = barrier.lemma_a_margins(config.n, config.theta1)
    if not lemma_a.ok:
        failures.append("lemma A margins are not positive")

    cutoff = barrier.build_cutoff(history.states[0], config.cutoff_r)
    lemma_b = barrier.lemma_b_track(history, cutoff)
    if not lemma_b.within_bound:
        failures.append("cutoff gradient outgrew A^2 e^{2Kt}")
    try:
        shil = barrier.shil_quantities(history, cutoff, config.theta1, config.B_const)
        if not shil.barrier_holds:
            failures.append(f"F reached the barrier H at t = {shil.first_crossing!r}")
    except HorizonExceeded as exc:
        shil = Skipped(str(exc))

    h_check = monitors.validate_h(config.h_kind, history.T_end, config.m)
    if not h_check.valid:
        failures.append("time weight h is not admissible")

    return RunReport(
        config=config,
        stop_reason=history.stop_reason,
        duration=duration,
        summary=summary,
        residuals=residuals,
        pick=pick,
        pick_check=pick_check,
        lemma_a=lemma_a,
        lemma_b=lemma_b,
        shil=shil,
        h_check=h_check,
        failures=tuple(failures),
    )


def run_scenario(config: ScenarioConfig) -> tuple[FlowHistory, RunReport]:
    start = time.perf_counter()
    history = run(config)
    report = analyse(history, config)
    return history, replace(report, duration=time.perf_counter() - start)
