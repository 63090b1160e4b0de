"""Command-line front end: analyze, simulate, sweep, pattern.

Exit status: 0 success, 1 usage or configuration error, 2 analysis-domain
error, 3 numerical failure during a run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import ConfigError, TuringRDError
from .kinetics import find_equilibrium, kinetic_stability
from .solver import GridState, max_timestep, read_profile, reference_profiles, run, write_profile, write_run
from .turing import (
    DiffusionParams,
    classify,
    critical_eigenvector,
    d1_window,
    d2_critical,
    mode_matrix,
    pattern_spec,
    small_amplitude_pattern,
)

OUT_ENV = "TURING_RD_OUT"
SWEEP_COLUMNS = ("d1", "d2", "verdict", "det_b1", "d2_crit")


def _g(x) -> str:
    return f"{x:.17g}"


def output_dir(cfg, command: str) -> Path:
    if cfg.out:
        return Path(cfg.out)
    return Path(os.environ.get(OUT_ENV, "turing_rd_out")) / command


def analyze(cfg) -> dict:
    """Equilibrium, Jacobian summary, bifurcation window and classification at (d1, d2)."""
    params = cfg.kinetic_params()
    dp = cfg.diffusion()
    eq = find_equilibrium(params)
    report = {
        "params": {k: getattr(params, k) for k in ("alpha", "gamma", "delta", "epsilon", "beta")},
        "d1": dp.d1,
        "d2": dp.d2,
        "l": dp.l,
        "equilibrium": {"n_bar": eq.n_bar, "p_bar": eq.p_bar},
        "interior_equilibria": [list(r) for r in eq.roots],
        "thetas": list(eq.thetas),
        "trace_a": eq.trace_a,
        "det_a": eq.det_a,
        "kinetic": kinetic_stability(eq),
        "d1_window": None,
        "d2_crit": None,
        "eigenvector": None,
        "notes": [],
    }
    try:
        lower, upper = d1_window(eq, dp.l)
        report["d1_window"] = [lower, upper]
    except TuringRDError as exc:
        report["notes"].append(str(exc))
        lower = upper = None
    if upper is not None:
        if dp.d1 >= upper:
            report["notes"].append(
                "d1 >= theta1/zeta1: no Turing bifurcation in d2 exists; the equilibrium is stable for all d2 > 0"
            )
        elif dp.d1 < lower:
            report["notes"].append(
                "d1 < theta1/zeta2: mode 1 is not the first to destabilise; d2_crit is not reported"
            )
        else:
            d2c = d2_critical(eq, dp.d1, dp.l)
            eta1, eta2 = critical_eigenvector(eq, dp.d1, d2c, dp.l)
            report["d2_crit"] = d2c
            report["eigenvector"] = {"eta1": eta1, "eta2": eta2, "ratio": eta1 / eta2}
    verdict = classify(eq, dp)
    report["verdict"] = verdict.kind.value
    report["unstable_modes"] = list(verdict.unstable_modes)
    report["margin"] = verdict.margin
    report["sufficient_condition"] = verdict.sufficient_condition
    report["unverified_hypotheses"] = list(verdict.unverified)
    report["dt_bound"] = max_timestep(params, dp, cfg.h)
    report["h"] = cfg.h
    return report


def format_analysis(rep: dict) -> str:
    eq = rep["equilibrium"]
    t1, t2, t3, t4 = rep["thetas"]
    lines = [
        f"equilibrium        N = {eq['n_bar']:.6f}   P = {eq['p_bar']:.6f}",
        f"thetas             {t1:.6g}  {t2:.6g}  {t3:.6g}  {t4:.6g}",
        f"trace A, det A     {rep['trace_a']:.6g}  {rep['det_a']:.6g}   ({rep['kinetic']})",
    ]
    if len(rep["interior_equilibria"]) > 1:
        others = ", ".join(f"({n:.6g}, {p:.6g})" for n, p in rep["interior_equilibria"])
        lines.append(f"interior equilibria {others}")
    if rep["d1_window"]:
        lo, hi = rep["d1_window"]
        lines.append(f"d1 window          [{lo:.10g}, {hi:.10g})")
    if rep["d2_crit"] is not None:
        ev = rep["eigenvector"]
        lines.append(f"d2 critical        {rep['d2_crit']:.10g}")
        lines.append(f"eigenvector        ({ev['eta1']:.6g}, {ev['eta2']:.6g})  eta1/eta2 = {ev['ratio']:.6g}")
    lines.append(f"(d1, d2)           ({rep['d1']:g}, {rep['d2']:g}) -> {rep['verdict']}")
    if rep["unstable_modes"]:
        lines.append(f"unstable modes     {rep['unstable_modes']}")
    lines.append(f"dt bound (h={rep['h']:g})  {rep['dt_bound']:.6g}")
    lines.extend(f"note: {n}" for n in rep["notes"])
    return "\n".join(lines)


def cmd_analyze(cfg) -> dict:
    rep = analyze(cfg)
    out = output_dir(cfg, "analyze")
    out.mkdir(parents=True, exist_ok=True)
    (out / "analysis.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    print(format_analysis(rep))
    return rep


def initial_state(cfg, params, dp, eq=None) -> GridState:
    if eq is None:
        eq = find_equilibrium(params)
    if cfg.initial == "equilibrium":
        return GridState.uniform(eq.n_bar, eq.p_bar, dp.l, cfg.h)
    if cfg.initial == "pattern":
        state = GridState.uniform(eq.n_bar, eq.p_bar, dp.l, cfg.h)
        if cfg.s == 0:
            return state
        ps = pattern_spec(eq, dp.d1, cfg.s, dp.l)
        n, p = small_amplitude_pattern(eq, ps, state.x, dp.l)
        # the scheme's bounds only hold for admissible data
        return GridState(cfg.h, np.clip(n, 0.0, 1.0), np.maximum(p, 0.0))
    x, n, p = read_profile(cfg.initial)
    state = GridState(cfg.h, n, p)
    if state.n_values.size != round(dp.l / cfg.h) + 1 or not np.allclose(x, state.x, atol=1e-9):
        raise ConfigError(f"{cfg.initial}: grid does not match h={cfg.h}, l={dp.l}")
    return state


def cmd_simulate(cfg):
    params = cfg.kinetic_params()
    dp = cfg.diffusion()
    eq = find_equilibrium(params)
    state = initial_state(cfg, params, dp, eq)
    reference = reference_profiles(cfg.reference, params, dp, state.x, cfg.s, eq)
    report = run(state, params, dp, cfg.solver_config(), reference)
    out = write_run(report, output_dir(cfg, "simulate"))
    first, last = report.linf_series[0], report.linf_series[-1]
    if report.converged:
        status = "converged"
    elif cfg.reference != "none" and last > first:
        status = "diverged"
    else:
        status = "not converged"
    summary = {
        "status": status,
        "converged": report.converged,
        "t_final": report.t_final,
        "steps": report.steps,
        "dt": report.dt,
        "initial_linf": float(first),
        "final_linf": float(last),
        "final_l2": float(report.l2_series[-1]),
        "extremes": report.extremes._asdict(),
        "reference": cfg.reference,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(
        f"{status}: t = {report.t_final:.6g} after {report.steps} steps (dt = {report.dt:.6g}); "
        f"Linf vs {cfg.reference}: {first:.3e} -> {last:.3e}"
    )
    return report, summary


def _sweep_row(args):
    params, l, d1, d2_values = args
    rows = []
    try:
        eq = find_equilibrium(params)
    except TuringRDError:
        return [(d1, d2, "error", None, None) for d2 in d2_values]
    try:
        d2c = d2_critical(eq, d1, l)
    except TuringRDError:
        d2c = None
    for d2 in d2_values:
        try:
            dp = DiffusionParams(d1, d2, l)
            verdict = classify(eq, dp).kind.value
            det_b1 = mode_matrix(eq, dp, 1).det_b
        except TuringRDError:
            verdict, det_b1 = "error", None
        rows.append((d1, d2, verdict, det_b1, d2c))
    return rows


def sweep(cfg) -> list:
    """Stability verdict on the (d1, d2) grid, row-major with d1 outer."""
    params = cfg.kinetic_params()
    d1s = np.linspace(cfg.d1_min, cfg.d1_max, cfg.d1_count)
    d2s = [float(v) for v in np.linspace(cfg.d2_min, cfg.d2_max, cfg.d2_count)]
    jobs = [(params, cfg.l, float(d1), d2s) for d1 in d1s]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                chunks = list(pool.map(_sweep_row, jobs))
        else:
            chunks = [_sweep_row(job) for job in jobs]
    return [row for chunk in chunks for row in chunk]


def format_sweep(rows) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for d1, d2, verdict, det_b1, d2c in rows:
        lines.append(",".join([_g(d1), _g(d2), verdict, "" if det_b1 is None else _g(det_b1),
                               "" if d2c is None else _g(d2c)]))
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg):
    rows = sweep(cfg)
    out = output_dir(cfg, "sweep")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(format_sweep(rows))
    counts = {}
    for row in rows:
        counts[row[2]] = counts.get(row[2], 0) + 1
    print(f"{len(rows)} cells -> {path}: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))
    return rows


def export_pattern(cfg):
    params = cfg.kinetic_params()
    dp = cfg.diffusion()
    eq = find_equilibrium(params)
    ps = pattern_spec(eq, dp.d1, cfg.s, dp.l)
    base = GridState.uniform(eq.n_bar, eq.p_bar, dp.l, cfg.h)
    n, p = small_amplitude_pattern(eq, ps, base.x, dp.l)
    state = GridState(cfg.h, n, p)
    out = output_dir(cfg, "pattern")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "pattern.csv"
    write_profile(path, state)
    print(f"pattern s={cfg.s:g} at d2_crit={ps.d2_crit:.10g}, eta=({ps.eta1:.6g}, {ps.eta2:.6g}) -> {path}")
    return state, ps


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep, "pattern": export_pattern}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dt_arg(text):
    return "auto" if text.strip().lower() == "auto" else float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/<command> or ./turing_rd_out/<command>)")
    common.add_argument("--d1", type=float)
    common.add_argument("--d2", type=float)
    common.add_argument("--s", type=float, help="pattern amplitude")
    common.add_argument("--h", type=float, help="mesh size")
    common.add_argument("--dt", type=_dt_arg, help="time step or 'auto'")
    common.add_argument("--t-end", type=float)
    common.add_argument("--steady-tol", type=float)
    common.add_argument("--probe-x", type=float)
    epilog = "configuration keys:\n" + cfgmod.describe_keys()
    parser = _Parser(
        prog="turing-rd",
        description="Turing instability analysis and simulation of a ratio-dependent predator-prey model.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "analyze": "equilibrium, thetas, d1 window, critical d2 and classification",
        "simulate": "integrate the PDE and write snapshots, manifest and norm series",
        "sweep": "stability verdict over a (d1, d2) grid",
        "pattern": "write the first-order small-amplitude pattern profile",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text, epilog=epilog,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def load_config(args):
    text = args.config.read_text() if args.config else ""
    cfg = cfgmod.parse_config(text)
    dt = args.dt
    changes = dict(
        out=args.out, d1=args.d1, d2=args.d2, s=args.s, h=args.h, t_end=args.t_end,
        steady_tol=args.steady_tol, probe_x=args.probe_x,
    )
    cfg = cfgmod.override(cfg, **changes)
    if dt == "auto":
        cfg = dataclasses.replace(cfg, dt=None)
    elif dt is not None:
        cfg = cfgmod.override(cfg, dt=dt)
    return cfg


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"turing-rd: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.showwarning = _show_warning
            cfg = load_config(args)
            COMMANDS[args.command](cfg)
    except OSError as exc:
        print(f"turing-rd: error: {exc}", file=sys.stderr)
        return 1
    except TuringRDError as exc:
        print(f"turing-rd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
