"""Shared builders for the test suite: small random problem instances."""

from __future__ import annotations

import numpy as np

from cfbeam.grwmmse import SubproblemData, build_subproblem
from cfbeam.harness import Instance, db_to_linear, make_instance
from cfbeam.rate_model import update_aux
from cfbeam.scenario import NetworkConfig


def build_config(
    num_ues: int = 4,
    num_aps: int = 3,
    antennas_per_ap: int = 2,
    num_pilots: int = 3,
    snr_dl_db: float = 14.0,
    snr_ul_db: float = 6.0,
    **extra,
) -> NetworkConfig:
    return NetworkConfig(
        num_ues=num_ues,
        num_aps=num_aps,
        antennas_per_ap=antennas_per_ap,
        num_pilots=num_pilots,
        snr_dl=db_to_linear(snr_dl_db),
        snr_ul=db_to_linear(snr_ul_db),
        **extra,
    )


def build_instance(seed: int, weighted: bool = True, **cfg_kwargs) -> Instance:
    return make_instance(build_config(**cfg_kwargs), seed=seed, weighted=weighted)


def build_random_subproblem(seed: int, ap: int = 0, **cfg_kwargs) -> tuple[SubproblemData, Instance]:
    """A subproblem taken at the random initial design of a random instance."""
    inst = build_instance(seed, **cfg_kwargs)
    aux = update_aux(inst.init, inst.cs)
    return build_subproblem(ap % inst.cs.num_aps, inst.init, aux, inst.cs, inst.mu), inst


def rel_err(got: np.ndarray, want: np.ndarray) -> float:
    got, want = np.asarray(got), np.asarray(want)
    return float(np.linalg.norm(got - want) / (1.0 + np.linalg.norm(want)))
