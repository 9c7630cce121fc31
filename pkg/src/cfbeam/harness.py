"""Monte Carlo experiment harness: sweeps, records, CSV, config boundary.

A sweep varies one knob (number of APs, or downlink SNR in dB), draws
`trials` independent scenario instances per point, runs every requested
solver from the same seed-derived initialisation, and records one row per
(point, trial, solver).  Emitted sum rates are always re-evaluated from the
stored beamformer against the original (robust) channel statistics, so a
solver cannot grade its own homework; wall time covers only the solve, never
channel generation or I/O.

This module is also the only place dB touches the code: config files and
SNR-sweep values are in dB, everything behind NetworkConfig is linear.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines, grwmmse
from .estimation import ChannelSet, sample_channel_set
from .grwmmse import SolverConfig, SolverReport
from .rate_model import random_weights, weighted_sum_rate
from .scenario import Geometry, NetworkConfig, PilotAssignment, assign_pilots, sample_geometry
from .seeds import trial_seed

SOLVER_NAMES = ("wmmse", "grwmmse_seq", "grwmmse_par", "grwmmse_seq_nonrobust", "zf", "mrt")
SWEEP_KINDS = ("num_aps", "snr_dl")
CSV_FIELDS = ("sweep", "solver", "trial", "seed", "wsr_bits", "wall_time_s", "iterations", "converged")
AGG_FIELDS = ("sweep", "solver", "trials", "wsr_mean", "wsr_std", "time_mean_s", "iterations_mean", "converged_frac")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


# -------------------------------------------------------------- instances --

@dataclass
class Instance:
    """One fully sampled problem: everything a solver run needs."""

    config: NetworkConfig
    geometry: Geometry
    pilots: PilotAssignment
    cs: ChannelSet
    mu: np.ndarray
    budgets: np.ndarray
    init: np.ndarray
    seed: int


def make_instance(config: NetworkConfig, seed: int, weighted: bool = False) -> Instance:
    """Sample geometry, channels, weights, and the shared initial design."""
    geometry = sample_geometry(config, seed)
    pilots = assign_pilots(config)
    cs = sample_channel_set(geometry, pilots, config, seed)
    mu = random_weights(config.num_ues, seed) if weighted else np.ones(config.num_ues)
    budgets = np.asarray(config.per_ap_budget, dtype=float)
    init = grwmmse.random_feasible_init(cs, budgets, seed)
    return Instance(config, geometry, pilots, cs, mu, budgets, init, seed)


def solve_by_name(
    name: str,
    instance: Instance,
    solver_config: SolverConfig | None = None,
) -> SolverReport:
    """Run one registered solver on an instance.

    The non-robust variant optimises against a view with the error statistics
    zeroed; its report still carries the beamformer, which callers must
    evaluate against the *original* statistics.  ZF/MRT are closed-form and
    get wrapped into zero-iteration reports.
    """
    cs, mu, budgets, init = instance.cs, instance.mu, instance.budgets, instance.init
    if name == "wmmse":
        return baselines.run_conventional(cs, mu, budgets, solver_config, init)
    if name == "grwmmse_seq":
        return grwmmse.run_sequential(cs, mu, budgets, solver_config, init)
    if name == "grwmmse_par":
        return grwmmse.run_parallel(cs, mu, budgets, solver_config, init)
    if name == "grwmmse_seq_nonrobust":
        view = baselines.non_robust_view(cs)
        return grwmmse.run_sequential(view, mu, budgets, solver_config, init)
    if name in ("zf", "mrt"):
        precoder = baselines.zf_precoder if name == "zf" else baselines.mrt_precoder
        t0 = time.perf_counter()
        v = precoder(cs, budgets)
        wall = time.perf_counter() - t0
        wsr = weighted_sum_rate(v, cs, mu)
        return SolverReport(
            beamformer=v,
            objective_trace=[wsr],
            surrogate_trace=[],
            iterations=0,
            wall_time_s=wall,
            converged=True,
        )
    raise ValueError(f"unknown solver {name!r}; expected one of {SOLVER_NAMES}")


# ------------------------------------------------------------ experiments --

@dataclass
class ExperimentSpec:
    """Declarative description of one sweep.

    ``values`` are in the sweep variable's external unit: AP counts for
    "num_aps", dB for "snr_dl" (converted when the per-point NetworkConfig is
    built, which is the config boundary).
    """

    sweep: str
    values: list[float]
    trials: int
    solvers: list[str]
    network: NetworkConfig = field(default_factory=NetworkConfig)
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    master_seed: int = 1
    weighted: bool = False

    def __post_init__(self):
        if self.sweep not in SWEEP_KINDS:
            raise ValueError(f"sweep must be one of {SWEEP_KINDS}, got {self.sweep!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = [s for s in self.solvers if s not in SOLVER_NAMES]
        if unknown:
            raise ValueError(f"unknown solvers {unknown}; expected among {SOLVER_NAMES}")
        if not self.solvers:
            raise ValueError("need at least one solver")

    def config_at(self, value: float) -> NetworkConfig:
        """Per-point network config; budgets re-derive from the new value."""
        if self.sweep == "num_aps":
            return replace(self.network, num_aps=int(value), per_ap_budget=None)
        return replace(self.network, snr_dl=db_to_linear(value), per_ap_budget=None)


@dataclass
class ResultRecord:
    """One CSV row; types match the documented schema exactly."""

    sweep: float
    solver: str
    trial: int
    seed: int
    wsr_bits: float
    wall_time_s: float
    iterations: int
    converged: bool


def run_experiment(spec: ExperimentSpec) -> list[ResultRecord]:
    """Execute the sweep; one record per (point, trial, solver).

    Identical spec + seed reproduce identical sum-rate fields (wall times are
    whatever the clock says).  A solver raising on some draw (e.g. ZF on a
    rank-deficient estimate) yields a converged=False record with NaN rate
    rather than aborting the sweep.
    """
    records: list[ResultRecord] = []
    for point_index, value in enumerate(spec.values):
        config = spec.config_at(value)
        for trial in range(spec.trials):
            seed = trial_seed(spec.master_seed, point_index, trial)
            instance = make_instance(config, seed, spec.weighted)
            for name in spec.solvers:
                try:
                    report = solve_by_name(name, instance, spec.solver_config)
                    wsr = weighted_sum_rate(report.beamformer, instance.cs, instance.mu)
                    records.append(ResultRecord(
                        sweep=float(value),
                        solver=name,
                        trial=trial,
                        seed=seed,
                        wsr_bits=wsr,
                        wall_time_s=report.wall_time_s,
                        iterations=report.iterations,
                        converged=report.converged,
                    ))
                except (ValueError, np.linalg.LinAlgError):
                    records.append(ResultRecord(
                        sweep=float(value), solver=name, trial=trial, seed=seed,
                        wsr_bits=float("nan"), wall_time_s=0.0, iterations=0, converged=False,
                    ))
    return records


# -------------------------------------------------------------------- CSV --

def emit_csv(records: list[ResultRecord], path: str) -> None:
    """Write records under the fixed header; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([
                repr(r.sweep), r.solver, r.trial, r.seed,
                repr(r.wsr_bits), repr(r.wall_time_s), r.iterations, r.converged,
            ])


def load_records(path: str) -> list[ResultRecord]:
    """Inverse of emit_csv."""
    out: list[ResultRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            out.append(ResultRecord(
                sweep=float(row[0]), solver=row[1], trial=int(row[2]), seed=int(row[3]),
                wsr_bits=float(row[4]), wall_time_s=float(row[5]),
                iterations=int(row[6]), converged=(row[7] == "True"),
            ))
    return out


def aggregate(records: list[ResultRecord]) -> list[dict]:
    """Mean/std per (sweep value, solver), NaN-failures excluded from means."""
    groups: dict[tuple[float, str], list[ResultRecord]] = {}
    for r in records:
        groups.setdefault((r.sweep, r.solver), []).append(r)
    rows = []
    for (value, solver), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        wsr = np.array([r.wsr_bits for r in rs])
        ok = ~np.isnan(wsr)
        rows.append({
            "sweep": value,
            "solver": solver,
            "trials": len(rs),
            "wsr_mean": float(wsr[ok].mean()) if ok.any() else float("nan"),
            "wsr_std": float(wsr[ok].std(ddof=1)) if ok.sum() > 1 else 0.0,
            "time_mean_s": float(np.mean([r.wall_time_s for r in rs])),
            "iterations_mean": float(np.mean([r.iterations for r in rs])),
            "converged_frac": float(np.mean([r.converged for r in rs])),
        })
    return rows


def emit_aggregate_csv(records: list[ResultRecord], path: str) -> None:
    rows = aggregate(records)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=AGG_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------- config files --

_NETWORK_KEYS = {
    "num_ues", "num_aps", "antennas_per_ap", "num_pilots", "radius",
    "ref_distance", "pathloss_exp", "snr_dl_db", "snr_ul_db", "noise_dl", "noise_ul",
}
_SOLVER_KEYS = {"max_outer_iters", "outer_tol", "bisect_tol", "step_beta0", "step_eps", "mode"}
_EXPERIMENT_KEYS = {"sweep", "values", "trials", "solvers", "seed", "weighted"}


def network_from_dict(raw: dict) -> NetworkConfig:
    """Build a NetworkConfig from config-file fields (SNRs given in dB)."""
    unknown = set(raw) - _NETWORK_KEYS
    if unknown:
        raise ValueError(f"unknown network config keys: {sorted(unknown)}")
    kwargs = {k: v for k, v in raw.items() if not k.endswith("_db")}
    if "snr_dl_db" in raw:
        kwargs["snr_dl"] = db_to_linear(raw["snr_dl_db"])
    if "snr_ul_db" in raw:
        kwargs["snr_ul"] = db_to_linear(raw["snr_ul_db"])
    return NetworkConfig(**kwargs)


def solver_from_dict(raw: dict) -> SolverConfig:
    unknown = set(raw) - _SOLVER_KEYS
    if unknown:
        raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
    return SolverConfig(**raw)


def load_config_file(path: str) -> dict:
    """Parse the JSON config file into its three sections.

    Returns {"network": NetworkConfig, "solver": SolverConfig,
    "experiment": dict} with absent sections defaulted.
    """
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - {"network", "solver", "experiment"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    exp = raw.get("experiment", {})
    bad = set(exp) - _EXPERIMENT_KEYS
    if bad:
        raise ValueError(f"unknown experiment keys: {sorted(bad)}")
    return {
        "network": network_from_dict(raw.get("network", {})),
        "solver": solver_from_dict(raw.get("solver", {})),
        "experiment": exp,
    }
