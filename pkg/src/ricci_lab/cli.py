"""Command-line entry point.

Exit codes: 0 success, 1 a check or monitor failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import glob
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import barrier, monitors, picking
from .config import parse_config
from .decomposition import check_identities
from .errors import InputError, IoError, NoViolation, RicciLabError
from .instances import random_instance
from .outputs import emit_outputs, format_report, load_snapshots, read_config_block
from .scenario import run_scenario

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _read_config(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def run_one(config_path: str, out_dir: str | None) -> tuple[int, str]:
    cfg = _read_config(config_path)
    history, report = run_scenario(cfg)
    out = Path(out_dir) if out_dir else Path("runs") / cfg.name
    emit_outputs(history, report, out)
    text = format_report(report)
    return (EXIT_OK if report.ok else EXIT_FAIL), text + f"outputs written to {out}\n"


def cmd_run(args) -> int:
    code, text = run_one(args.config, args.out)
    print(text, end="")
    return code


def _sweep_job(job: tuple[str, str]) -> tuple[str, int, str]:
    path, out = job
    try:
        code, text = run_one(path, out)
    except InputError as exc:
        return path, EXIT_INPUT, f"input error: {exc}\n"
    except RicciLabError as exc:
        return path, EXIT_FAIL, f"error: {exc}\n"
    return path, code, text


def cmd_sweep(args) -> int:
    paths = sorted(glob.glob(args.pattern))
    if not paths:
        print(f"no config matches {args.pattern!r}", file=sys.stderr)
        return EXIT_INPUT
    base = Path(args.out)
    jobs = [(p, str(base / Path(p).stem)) for p in paths]
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for path, code, text in pool.map(_sweep_job, jobs):
            print(f"--- {path}: exit {code}")
            print(text, end="")
            worst = max(worst, code)
    return worst


def cmd_pick(args) -> int:
    src = Path(args.snapshots)
    n, topology = args.n, args.topology
    report_path = src.with_name("report.txt")
    if (n is None or topology is None) and report_path.exists():
        cfg = read_config_block(report_path.read_text(encoding="utf-8"))
        n = cfg.n if n is None else n
        topology = cfg.topology if topology is None else topology
    if n is None or topology is None:
        raise IoError("pass --n and --topology, or keep report.txt next to the snapshots")
    history = load_snapshots(src, n, topology)
    params = picking.PickParams(alpha=args.alpha, eta=args.eta, mode=args.mode, epsilon=args.epsilon, x0=args.x0)
    try:
        result = picking.pick_point(history, params)
    except NoViolation as exc:
        print(f"no pick: {exc}")
        return EXIT_OK
    check = picking.verify_pick(history, result, params)
    print(f"point = snapshot {result.point[0]}, node {result.point[1]}")
    print(f"t_bar = {result.t_bar!r}")
    print(f"Q_bar = {result.Q_bar!r}")
    print(f"window = [{result.window[0]!r}, {result.window[1]!r}]")
    if result.radius is not None:
        print(f"radius = {result.radius!r}")
    print(f"iterations = {result.iterations}")
    print(f"threshold_ok = {result.threshold_ok}")
    print(f"dominated_ok = {result.dominated_ok}")
    print(f"containment_ok = {result.containment_ok}")
    print(f"independent check = {'pass' if check.ok else 'FAIL'}")
    return EXIT_OK if (result.ok and check.ok) else EXIT_FAIL


def cmd_check_decomposition(args) -> int:
    rng = np.random.default_rng(args.seed)
    dims = [args.n] if args.n is not None else list(range(2, 9))
    worst_all = 0.0
    for n in dims:
        if n < 2:
            raise InputError("n must be at least 2")
        worst = max(check_identities(random_instance(rng, n)).worst for _ in range(args.cases))
        worst_all = max(worst_all, worst)
        print(f"n = {n}: {args.cases} cases, worst relative defect {worst:.3e}")
    ok = worst_all < args.tol
    print("pass" if ok else f"FAIL (tolerance {args.tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lemma_a(args) -> int:
    try:
        m = barrier.lemma_a_margins(args.n, args.theta1)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    print(f"c = {m.c}")
    print(f"d = {m.d!r}")
    print(f"margin_c = {m.margin_c!r}")
    print(f"margin_d = {m.margin_d!r}")
    return EXIT_OK if m.ok else EXIT_FAIL


def cmd_validate_h(args) -> int:
    try:
        rep = monitors.validate_h(args.kind, args.T, args.m)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    print(f"kind = {rep.kind}")
    print(f"h <= t: {rep.below_t}")
    print(f"m_required = {rep.m_required!r}")
    print(f"valid for m = {rep.m!r}: {rep.valid}")
    return EXIT_OK if rep.valid else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ricci-lab", description="Rotationally symmetric Ricci flow laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write series, snapshots and a report")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default runs/<name>)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("pick", help="point picking on a stored snapshots.csv")
    p.add_argument("snapshots")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mode", choices=("global", "local"), default="global")
    p.add_argument("--x0", type=float, default=0.5, help="centre as a grid coordinate in [0, 1]")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--n", type=int)
    p.add_argument("--topology", choices=("sphere", "neck"))
    p.set_defaults(func=cmd_pick)

    p = sub.add_parser("check-decomposition", help="trace decomposition identities on random Bianchi-consistent tensors")
    p.add_argument("--n", type=int)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_check_decomposition)

    p = sub.add_parser("lemma-a", help="margins of the barrier constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta1", type=float, required=True)
    p.set_defaults(func=cmd_lemma_a)

    p = sub.add_parser("validate-h", help="admissibility of the time weight h")
    p.add_argument("--kind", choices=("linear", "sine"), required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--m", type=float, default=2.0)
    p.set_defaults(func=cmd_validate_h)

    p = sub.add_parser("sweep", help="run every config matching a glob, in parallel")
    p.add_argument("pattern")
    p.add_argument("--out", default="runs")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, IoError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RicciLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
