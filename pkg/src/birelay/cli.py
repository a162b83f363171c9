"""Command line front end.

Subcommands:

* sweep: run the adaptive protocol and/or benchmarks over a transmit-power
  sweep and write one CSV/JSON row per (protocol, operating point).
* calibrate: solve one operating point's duals and print them.
* verify: run the brute-force oracle checks and print one line each.

Output is deterministic: identical arguments produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import benchmarks, engine, oracle, policy
from .calibrate import CalibrationConfig, calibrate
from .channel import ChannelState, FadingStatistics, sample_trace

__all__ = ["RunSpec", "run_sweep", "emit", "build_parser", "main"]

PROTOCOLS = ("proposed",) + benchmarks.KINDS

COLUMNS = (
    "protocol",
    "pt_db",
    "sum_rate",
    "r1r",
    "r2r",
    "rr1",
    "rr2",
    "avg_power",
    "freq_m1",
    "freq_m2",
    "freq_m3",
    "freq_m4",
    "freq_m5",
    "freq_m6",
    "mu1",
    "mu2",
    "gamma",
    "converged",
)


@dataclass(frozen=True)
class RunSpec:
    """Everything one sweep needs; identical specs give identical bytes."""

    omega1: float = 1.0
    omega2: float = 1.0
    pt_db: tuple[float, ...] = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    n_slots: int = 10_000
    seed: int = 1234
    protocols: tuple[str, ...] = PROTOCOLS
    fmt: str = "csv"
    out: str | None = None
    tol_rate: float = 0.01
    tol_power: float = 0.005

    def __post_init__(self) -> None:
        if not self.pt_db:
            raise ValueError("power sweep is empty")
        bad = [p for p in self.protocols if p not in PROTOCOLS]
        if bad:
            raise ValueError(f"unknown protocols: {bad}")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")


def _prepare(name: str, spec: RunSpec, p_total: float, trace, cache: dict):
    """Build the policy for one protocol at one power point, calibrating
    (and caching per operating point) where the protocol needs it."""
    key = (name, spec.omega1, spec.omega2, p_total, spec.seed, spec.n_slots)
    if key in cache:
        return cache[key]
    stats = trace.stats
    if name == "proposed":
        cfg = CalibrationConfig(
            stats=stats,
            p_total=p_total,
            n_slots=spec.n_slots,
            seed=spec.seed,
            tol_rate=spec.tol_rate,
            tol_power=spec.tol_power,
        )
        result = calibrate(cfg)
        th = result.thresholds
        prepared = {
            "decide": policy.proposed_policy(th, stats),
            "mu1": th.mu1,
            "mu2": th.mu2,
            "gamma": th.gamma,
            "converged": result.converged,
        }
    elif name in ("tdbc_no_pa", "tdbc_pa"):
        bench = benchmarks.tdbc_policy(
            benchmarks.BenchmarkConfig(kind=name, p_total=p_total), trace, spec.tol_power
        )
        prepared = {
            "decide": bench.decide,
            "mu1": bench.mu1,
            "mu2": bench.mu2,
            "gamma": bench.gamma,
            "converged": bench.converged,
        }
    else:
        bench = benchmarks.fixed_power_policy(
            benchmarks.BenchmarkConfig(kind=name, p_total=p_total), trace, spec.tol_rate
        )
        prepared = {
            "decide": bench.decide,
            "mu1": bench.mu1,
            "mu2": bench.mu2,
            "gamma": bench.gamma,
            "converged": bench.converged,
        }
    cache[key] = prepared
    return prepared


def run_sweep(spec: RunSpec) -> list[dict]:
    """Simulate every requested protocol at every power point. All
    protocols share the same fading trace per operating point."""
    stats = FadingStatistics(spec.omega1, spec.omega2)
    trace = sample_trace(stats, spec.n_slots, spec.seed)
    cache: dict = {}
    rows = []
    for pt_db in spec.pt_db:
        p_total = 10.0 ** (pt_db / 10.0)
        for name in spec.protocols:
            prepared = _prepare(name, spec, p_total, trace, cache)
            report = engine.run(trace, prepared["decide"])
            row = {
                "protocol": name,
                "pt_db": pt_db,
                "sum_rate": report.sum_rate,
                "r1r": report.r_1r,
                "r2r": report.r_2r,
                "rr1": report.r_r1,
                "rr2": report.r_r2,
                "avg_power": report.avg_power,
            }
            for k in range(6):
                row[f"freq_m{k + 1}"] = report.mode_freq[k]
            row["mu1"] = prepared["mu1"]
            row["mu2"] = prepared["mu2"]
            row["gamma"] = prepared["gamma"]
            row["converged"] = prepared["converged"]
            rows.append(row)
    return rows


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(rows: list[dict], fmt: str, out: str | None) -> str:
    """Render rows in the stable column order and write or return them."""
    if fmt == "csv":
        lines = [",".join(COLUMNS)]
        lines += [",".join(_fmt_cell(row[c]) for c in COLUMNS) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps([{c: row[c] for c in COLUMNS} for row in rows], indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega1", type=float, default=None, help="mean gain of link 1")
    p.add_argument("--omega2", type=float, default=None, help="mean gain of link 2")
    p.add_argument("--slots", type=int, default=None, help="trace length")
    p.add_argument("--seed", type=int, default=None, help="trace seed")
    p.add_argument("--tol-rate", type=float, default=None, help="rate residual tolerance")
    p.add_argument("--tol-power", type=float, default=None, help="power residual tolerance")
    p.add_argument("--config", type=str, default=None, help="JSON config file; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="birelay")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="simulate protocols over a power sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--pt-db-start", type=float, default=None)
    p_sweep.add_argument("--pt-db-stop", type=float, default=None)
    p_sweep.add_argument("--pt-db-step", type=float, default=None)
    p_sweep.add_argument("--pt-db-list", type=str, default=None, help="comma separated dB values")
    p_sweep.add_argument("--protocols", type=str, default=None, help="comma separated names")
    p_sweep.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p_sweep.add_argument("--out", type=str, default=None, help="output path (default stdout)")

    p_cal = sub.add_parser("calibrate", help="solve one operating point's duals")
    _add_common(p_cal)
    p_cal.add_argument("--pt-db", type=float, default=None)

    p_ver = sub.add_parser("verify", help="run the brute-force oracle checks")
    _add_common(p_ver)
    p_ver.add_argument("--draws", type=int, default=200, help="random draws per check")
    p_ver.add_argument("--grid-points", type=int, default=800)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _pick(args, cfg: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        return cfg[key]
    return default


def _sweep_spec(args) -> RunSpec:
    cfg = _load_config(args.config)
    pt_list = _pick(args, cfg, "pt_db_list", None)
    if isinstance(pt_list, str):
        pt_db = tuple(float(x) for x in pt_list.split(","))
    elif isinstance(pt_list, (list, tuple)):
        pt_db = tuple(float(x) for x in pt_list)
    else:
        start = _pick(args, cfg, "pt_db_start", -20.0)
        stop = _pick(args, cfg, "pt_db_stop", 20.0)
        step = _pick(args, cfg, "pt_db_step", 5.0)
        if step <= 0.0:
            raise ValueError("pt-db-step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ValueError("empty power sweep")
        pt_db = tuple(start + k * step for k in range(count))
    protocols = _pick(args, cfg, "protocols", None)
    if isinstance(protocols, str):
        protocols = tuple(p.strip() for p in protocols.split(","))
    elif isinstance(protocols, (list, tuple)):
        protocols = tuple(protocols)
    else:
        protocols = PROTOCOLS
    return RunSpec(
        omega1=_pick(args, cfg, "omega1", 1.0),
        omega2=_pick(args, cfg, "omega2", 1.0),
        pt_db=pt_db,
        n_slots=_pick(args, cfg, "slots", 10_000),
        seed=_pick(args, cfg, "seed", 1234),
        protocols=protocols,
        fmt=_pick(args, cfg, "fmt", "csv"),
        out=_pick(args, cfg, "out", None),
        tol_rate=_pick(args, cfg, "tol_rate", 0.01),
        tol_power=_pick(args, cfg, "tol_power", 0.005),
    )


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    rows = run_sweep(spec)
    emit(rows, spec.fmt, spec.out)
    return 0 if all(row["converged"] for row in rows) else 1


def cmd_calibrate(args) -> int:
    cfg_file = _load_config(args.config)
    stats = FadingStatistics(
        _pick(args, cfg_file, "omega1", 1.0), _pick(args, cfg_file, "omega2", 1.0)
    )
    pt_db = _pick(args, cfg_file, "pt_db", 10.0)
    cfg = CalibrationConfig(
        stats=stats,
        p_total=10.0 ** (pt_db / 10.0),
        n_slots=_pick(args, cfg_file, "slots", 10_000),
        seed=_pick(args, cfg_file, "seed", 1234),
        tol_rate=_pick(args, cfg_file, "tol_rate", 0.01),
        tol_power=_pick(args, cfg_file, "tol_power", 0.005),
    )
    result = calibrate(cfg)
    th = result.thresholds
    print(f"mu1={th.mu1!r} mu2={th.mu2!r} gamma={th.gamma!r}")
    print(
        f"residual_c1={result.residual_c1:.3e} residual_c2={result.residual_c2:.3e} "
        f"residual_c3={result.residual_c3:.3e} iterations={result.iterations} "
        f"converged={str(result.converged).lower()}"
    )
    return 0 if result.converged else 1


def _verify_lines(draws: int, grid_points: int, seed: int) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    checks: list[tuple[str, bool, str]] = []

    worst_gap = 0.0
    worst_step = 0.0
    for _ in range(draws):
        mu1, mu2 = rng.uniform(0.05, 0.95, 2)
        gamma = float(rng.uniform(0.05, 2.0))
        s1, s2 = (float(x) for x in rng.exponential(1.0, 2))
        stats = FadingStatistics(2.0, 1.0) if mu1 >= mu2 else FadingStatistics(1.0, 2.0)
        ch = ChannelState(1, s1, s2)
        th = policy.Thresholds(mu1, mu2, gamma)
        t = policy.optimal_time_share(stats)
        mp = policy.mode_powers(ch, th, stats)
        sm = policy.selection_metrics(ch, th, mp, t)
        grid = oracle.GridSpec(0.0, 10.0 / gamma, grid_points)
        step = grid.axis()[1]
        closed = {
            1: ((mp.p1_m1,), sm.lambda1),
            2: ((mp.p2_m2,), sm.lambda2),
            3: ((mp.p1_m3, mp.p2_m3), sm.lambda3),
            6: ((mp.pr_m6,), sm.lambda6),
        }
        for mode, (powers, lam) in closed.items():
            g_powers, g_val = oracle.grid_max_metric(mode, ch, th, t, grid)
            worst_gap = max(worst_gap, g_val - lam)
            worst_step = max(
                worst_step, max(abs(a - b) / step for a, b in zip(powers, g_powers))
            )
    checks.append(
        (
            "closed-form power optimality vs grid",
            worst_gap <= 1e-6 and worst_step <= 1.000001,
            f"worst metric gap {worst_gap:.2e}, worst argmax offset {worst_step:.2f} steps",
        )
    )

    n = 10_000
    mu1 = rng.uniform(0.05, 0.95, n)
    mu2 = rng.uniform(0.05, 0.95, n)
    gamma = rng.uniform(0.05, 2.0, n)
    s1 = rng.exponential(1.0, n)
    s2 = rng.exponential(1.0, n)
    worst = 0.0
    for i in range(n):
        pr = float(policy._broadcast_power(s1[i], s2[i], mu1[i], mu2[i], gamma[i]))
        if pr > 0.0:
            lhs = mu2[i] * s1[i] / (1.0 + pr * s1[i]) + mu1[i] * s2[i] / (1.0 + pr * s2[i])
            worst = max(worst, abs(lhs - gamma[i] * math.log(2.0)) / (gamma[i] * math.log(2.0)))
    checks.append(
        ("broadcast power root residual", worst <= 1e-8, f"worst relative residual {worst:.2e}")
    )

    ok = True
    for i in range(min(draws, 1000)):
        ch = ChannelState(1, float(s1[i]), float(s2[i]))
        th = policy.Thresholds(float(mu1[i]), float(mu2[i]), float(gamma[i]))
        _, _, t_best = oracle.t_sweep(ch, th, 1.0, 1.0, 101)
        want = 0.0 if th.mu1 >= th.mu2 else 1.0
        if t_best not in (0.0, 1.0) or (abs(th.mu1 - th.mu2) > 1e-9 and t_best != want):
            ok = False
    checks.append(("time share optimum sits at a boundary", ok, "argmax in {0, 1}"))

    worst_dom = 0.0
    for i in range(n):
        ch = ChannelState(1, float(s1[i]), float(s2[i]))
        th = policy.Thresholds(float(mu1[i]), float(mu2[i]), float(gamma[i]))
        stats = FadingStatistics(1.0, 1.0)
        sm = policy.selection_metrics(ch, th, policy.mode_powers(ch, th, stats), 0.0)
        worst_dom = max(worst_dom, sm.lambda4 - sm.lambda6, sm.lambda5 - sm.lambda6)
    checks.append(
        (
            "broadcast dominates single-user downlinks",
            worst_dom <= 1e-12,
            f"worst lambda gap {worst_dom:.2e}",
        )
    )
    return checks


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    seed = _pick(args, cfg, "seed", 1234)
    checks = _verify_lines(args.draws, args.grid_points, seed)
    failures = 0
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        failures += 0 if passed else 1
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "calibrate":
            return cmd_calibrate(args)
        return cmd_verify(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
