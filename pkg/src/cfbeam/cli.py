"""Command-line front end.

    cfbeam sweep-aps  [--config cfg.json] [--values 8,16,24,32] [--trials N]
                      [--solvers wmmse,grwmmse_seq] [--seed S] [--out r.csv]
                      [--agg-out agg.csv]
    cfbeam sweep-snr  ... (values in dB)
    cfbeam single     [--config cfg.json] [--seed S] [--solvers ...] [--out trace.csv]
    cfbeam selftest

Sweeps write one CSV row per (point, trial, solver) and print the aggregate
table.  `single` solves one instance verbosely; its optional CSV holds the
per-iteration traces and is byte-identical across reruns with the same seed
(wall-clock diagnostics go to stdout only).  Flag > config file > default.
"""

from __future__ import annotations

import argparse
import sys

from .grwmmse import SolverConfig
from .harness import (
    SOLVER_NAMES,
    ExperimentSpec,
    aggregate,
    emit_aggregate_csv,
    emit_csv,
    load_config_file,
    make_instance,
    run_experiment,
    solve_by_name,
)
from .scenario import NetworkConfig
from .selftest import run_selftest

DEFAULT_SWEEP_APS = [8.0, 16.0, 24.0, 32.0]
DEFAULT_SWEEP_SNR_DB = [0.0, 5.0, 10.0, 15.0, 20.0]
DEFAULT_SOLVERS = ["wmmse", "grwmmse_seq", "grwmmse_par"]
DEFAULT_SNR_SOLVERS = ["grwmmse_seq", "grwmmse_seq_nonrobust"]


def _parse_values(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"cannot parse --values {text!r}: {exc}") from None


def _parse_solvers(text: str) -> list[str]:
    names = [tok.strip() for tok in text.split(",") if tok.strip()]
    for name in names:
        if name not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {name!r}; choices: {','.join(SOLVER_NAMES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfbeam", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_values: bool):
        p.add_argument("--config", help="JSON config file (network/solver/experiment sections)")
        p.add_argument("--seed", type=int, default=None, help="master seed (default 1)")
        p.add_argument("--solvers", default=None, help="comma-separated solver names")
        p.add_argument("--out", default=None, help="write the per-record CSV here")
        if with_values:
            p.add_argument("--values", default=None, help="comma-separated sweep points")
            p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
            p.add_argument("--agg-out", default=None, help="also write the aggregated CSV here")

    add_common(sub.add_parser("sweep-aps", help="sweep the number of APs"), with_values=True)
    add_common(sub.add_parser("sweep-snr", help="sweep the downlink SNR (dB)"), with_values=True)
    add_common(sub.add_parser("single", help="solve one instance, print traces"), with_values=False)
    sub.add_parser("selftest", help="run the quick invariant battery")
    return parser


def _load_sections(args) -> tuple[NetworkConfig, SolverConfig, dict]:
    if args.config:
        sections = load_config_file(args.config)
        return sections["network"], sections["solver"], sections["experiment"]
    return NetworkConfig(), SolverConfig(), {}


def _run_sweep(args, kind: str) -> int:
    network, solver_cfg, exp = _load_sections(args)
    default_values = DEFAULT_SWEEP_APS if kind == "num_aps" else DEFAULT_SWEEP_SNR_DB
    default_solvers = DEFAULT_SOLVERS if kind == "num_aps" else DEFAULT_SNR_SOLVERS
    values = _parse_values(args.values) if args.values else list(exp.get("values", default_values))
    solvers = _parse_solvers(args.solvers) if args.solvers else list(exp.get("solvers", default_solvers))
    spec = ExperimentSpec(
        sweep=kind,
        values=[float(v) for v in values],
        trials=args.trials if args.trials is not None else int(exp.get("trials", 10)),
        solvers=solvers,
        network=network,
        solver_config=solver_cfg,
        master_seed=args.seed if args.seed is not None else int(exp.get("seed", 1)),
        weighted=bool(exp.get("weighted", False)),
    )
    records = run_experiment(spec)
    if args.out:
        emit_csv(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")
    if args.agg_out:
        emit_aggregate_csv(records, args.agg_out)
        print(f"wrote aggregate to {args.agg_out}")
    print(f"{'sweep':>8} {'solver':>24} {'trials':>7} {'wsr_mean':>10} {'wsr_std':>9} {'time[s]':>9}")
    for row in aggregate(records):
        print(f"{row['sweep']:>8g} {row['solver']:>24} {row['trials']:>7d} "
              f"{row['wsr_mean']:>10.4f} {row['wsr_std']:>9.4f} {row['time_mean_s']:>9.4f}")
    return 0


def _run_single(args) -> int:
    network, solver_cfg, exp = _load_sections(args)
    seed = args.seed if args.seed is not None else int(exp.get("seed", 1))
    solvers = _parse_solvers(args.solvers) if args.solvers else list(exp.get("solvers", DEFAULT_SOLVERS))
    instance = make_instance(network, seed, weighted=bool(exp.get("weighted", False)))
    print(f"instance: K={network.num_ues} M={network.num_aps} n_A={network.antennas_per_ap} seed={seed}")
    rows: list[tuple[str, int, float, float]] = []
    for name in solvers:
        report = solve_by_name(name, instance, solver_cfg)
        from .rate_model import weighted_sum_rate  # evaluation against the original stats

        wsr = weighted_sum_rate(report.beamformer, instance.cs, instance.mu)
        print(f"  {name:<24} wsr={wsr:.6f} bits  iters={report.iterations:<4d} "
              f"time={report.wall_time_s:.3f}s  converged={report.converged}")
        for it, (w, s) in enumerate(zip(report.objective_trace, report.surrogate_trace)):
            rows.append((name, it, w, s))
    if args.out:
        import csv

        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["solver", "iteration", "wsr_bits", "surrogate"])
            for name, it, w, s in rows:
                writer.writerow([name, it, repr(w), repr(s)])
        print(f"wrote traces to {args.out}")
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep-aps":
            return _run_sweep(args, "num_aps")
        if args.command == "sweep-snr":
            return _run_sweep(args, "snr_dl")
        if args.command == "single":
            return _run_single(args)
        if args.command == "selftest":
            return 0 if run_selftest() == 0 else 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


def main() -> None:
    sys.exit(cli_main())
