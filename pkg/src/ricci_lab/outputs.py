"""CSV and text persistence of runs.

Floats are written with repr, which round-trips exactly, so a reloaded
snapshots.csv rebuilds the same states bit for bit.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, format_config, parse_config
from .errors import IoError
from .flow import FlowHistory
from .geometry import Grid, Topology, WarpedState
from .monitors import SERIES_COLUMNS, SeriesRow
from .scenario import RunReport, Skipped

CONFIG_OPEN = "[config]"
CONFIG_CLOSE = "[/config]"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def series_csv(rows: list[SeriesRow] | tuple[SeriesRow, ...]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(SERIES_COLUMNS)
    for row in rows:
        out.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def snapshots_csv(history: FlowHistory) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(("t", "x", "psi", "w"))
    for state in history.states:
        t = _fmt(state.t)
        for x, p, w in zip(state.grid.x, state.psi, state.w):
            out.writerow((t, _fmt(x), _fmt(p), _fmt(w)))
    return buf.getvalue()


def load_snapshots(path, n: int, topology: Topology | str, scenario: ScenarioConfig | None = None) -> FlowHistory:
    """Rebuild a FlowHistory from snapshots.csv."""
    topology = Topology(topology)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["t", "x", "psi", "w"]:
                raise IoError(f"{path}: expected header t,x,psi,w, got {header}")
            blocks: dict[str, list[tuple[float, float]]] = {}
            order: list[str] = []
            for rec in reader:
                if len(rec) != 4:
                    raise IoError(f"{path}: malformed row {rec}")
                if rec[0] not in blocks:
                    blocks[rec[0]] = []
                    order.append(rec[0])
                blocks[rec[0]].append((float(rec[2]), float(rec[3])))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise IoError(f"{path}: {exc}") from exc
    if not order:
        raise IoError(f"{path}: no snapshots")
    states = []
    for key in order:
        data = np.array(blocks[key])
        grid = Grid(len(data) - 1)
        states.append(WarpedState(grid, n, float(key), data[:, 0].copy(), data[:, 1].copy(), topology))
    return FlowHistory.from_states(states, scenario)


def read_config_block(text: str) -> ScenarioConfig:
    try:
        start = text.index(CONFIG_OPEN) + len(CONFIG_OPEN)
        stop = text.index(CONFIG_CLOSE, start)
    except ValueError:
        raise IoError("report has no config block") from None
    return parse_config(text[start:stop])


def _section(title: str, lines: list[str]) -> str:
    return "\n".join([f"== {title} ==", *lines, ""])


def format_report(report: RunReport) -> str:
    s = report.summary
    parts = [
        f"scenario: {report.config.name}",
        f"stop_reason: {report.stop_reason}",
        f"duration_s: {report.duration:.3f}",
        f"status: {'ok' if report.ok else 'FAILED'}",
        "",
    ]
    parts.append(
        _section(
            "monitors",
            [
                f"K_bar = {s.K_bar!r}",
                f"Lambda0 = {s.Lambda0!r}",
                f"T = {s.T!r}",
                f"shi_ratio_max = {s.shi_ratio_max!r}",
                f"shi_ratio_h_max = {s.shi_ratio_h_max!r}",
                f"rm_ratio_max = {s.rm_ratio_max!r}",
                f"taming_early = {s.taming_early!r}",
                f"taming_late = {s.taming_late!r}",
                f"beta_needed_max = {s.beta_needed_max!r}",
                f"shig_ratio_max = {s.shig_ratio_max!r}",
                f"delta_observed = {s.delta_observed!r}  (lower bound from the injectivity surrogate)",
                f"alt norm: shi_ratio_max = {s.shi_ratio_max_alt!r}, shi_ratio_h_max = {s.shi_ratio_h_max_alt!r},"
                f" shig_ratio_max = {s.shig_ratio_max_alt!r}",
            ],
        )
    )
    r = report.residuals
    if isinstance(r, Skipped):
        lines = [f"skipped: {r.reason}"]
    else:
        lines = [f"median = {r.overall_median!r}", f"max = {r.overall_max!r}"]
    parts.append(_section("evolution residual", lines))
    p = report.pick
    if isinstance(p, Skipped):
        lines = [f"skipped: {p.reason}"]
    else:
        v = report.pick_check
        lines = [
            f"mode = {p.mode}",
            f"point = snapshot {p.point[0]}, node {p.point[1]}",
            f"Q_bar = {p.Q_bar!r}",
            f"t_bar = {p.t_bar!r}",
            f"window = [{p.window[0]!r}, {p.window[1]!r}]",
            f"radius = {p.radius!r}",
            f"iterations = {p.iterations}",
            f"threshold_ok = {p.threshold_ok}, dominated_ok = {p.dominated_ok}, containment_ok = {p.containment_ok}",
            f"independent check = {'pass' if v.ok else 'FAIL'}",
            *[f"note: {note}" for note in p.notes],
        ]
    parts.append(_section("point picking", lines))
    a = report.lemma_a
    parts.append(
        _section("lemma A", [f"c = {a.c}, d = {a.d!r}", f"margin_c = {a.margin_c!r}", f"margin_d = {a.margin_d!r}"])
    )
    b = report.lemma_b
    parts.append(
        _section(
            "lemma B",
            [
                f"A = {b.A!r}",
                f"within A^2 e^(2Kt) = {b.within_bound}",
                f"first gradient violation of 2A^2 = {b.first_grad_violation!r}",
                f"first Hessian violation of 2A^2 = {b.first_hess_violation!r}",
            ],
        )
    )
    sh = report.shil
    if isinstance(sh, Skipped):
        lines = [f"skipped: {sh.reason}"]
    else:
        lines = [
            f"horizon = {sh.horizon!r} ({sh.times.size} snapshots, {sh.excluded} excluded)",
            f"C1 measured = {sh.C1_measured!r}, used = {sh.params.C1!r}",
            f"C2 measured = {sh.C2_measured!r}, used = {sh.params.C2!r}",
            f"B = {sh.params.B_const!r}, b = {sh.params.b_F!r}",
            f"min(H - F) = {sh.margin_min!r}",
            f"first crossing = {sh.first_crossing!r}",
            f"best-fit C = {sh.C_fit!r}",
        ]
    parts.append(_section("barrier", lines))
    h = report.h_check
    parts.append(
        _section("time weight", [f"kind = {h.kind}", f"m_required = {h.m_required!r}", f"valid = {h.valid}"])
    )
    if report.failures:
        parts.append(_section("failures", list(report.failures)))
    parts.append(CONFIG_OPEN)
    parts.append(format_config(report.config).rstrip("\n"))
    parts.append(CONFIG_CLOSE)
    return "\n".join(parts) + "\n"


def emit_outputs(history: FlowHistory, report: RunReport, out_dir) -> dict[str, Path]:
    if len(history) == 0:
        raise IoError("refusing to write an empty history")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "series": out / "series.csv",
            "snapshots": out / "snapshots.csv",
            "report": out / "report.txt",
        }
        files["series"].write_text(series_csv(report.summary.rows))
        files["snapshots"].write_text(snapshots_csv(history))
        files["report"].write_text(format_report(report))
    except OSError as exc:
        raise IoError(f"cannot write to {out}: {exc}") from exc
    return files
