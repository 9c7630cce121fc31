"""Network layout, large-scale fading, and pilot bookkeeping.

A scenario is a disk of radius `radius` with `num_aps` access points (APs) of
`antennas_per_ap` antennas each and `num_ues` single-antenna user terminals,
all dropped uniformly at random.  Large-scale gain between UE k and AP i is a
pure power-law in distance,

    rho[k, i] = (max(d_ki, 1 m) / ref_distance) ** (-pathloss_exp),

with the distance floored at one metre so co-located drops cannot blow up the
gain.  Uplink pilots are length-`num_pilots` orthogonal sequences handed out
round-robin, so UEs sharing a pilot contaminate each other's channel
estimates (see estimation.py).

All powers are linear (never dB) inside the library; the CLI converts at the
config-file boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeds import substream

DISTANCE_FLOOR = 1.0  # metres; drops closer than this are treated as 1 m apart


@dataclass
class NetworkConfig:
    """Static description of one deployment; all rates/powers linear."""

    num_ues: int = 12            # K
    num_aps: int = 8             # M
    antennas_per_ap: int = 2     # antennas per AP
    num_pilots: int = 10         # orthogonal pilot sequences (pilot length)
    radius: float = 350.0        # deployment disk radius [m]
    ref_distance: float = 30.0   # path-loss reference distance [m]
    pathloss_exp: float = 3.0    # path-loss exponent
    snr_dl: float = 100.0        # downlink transmit SNR, linear (100 = 20 dB)
    snr_ul: float = 10.0         # uplink pilot SNR, linear (10 = 10 dB)
    noise_dl: float = 1.0        # downlink noise power (normalised)
    noise_ul: float = 1.0        # uplink noise power (normalised)
    per_ap_budget: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.num_ues < 1 or self.num_aps < 1 or self.antennas_per_ap < 1:
            raise ValueError("num_ues, num_aps, antennas_per_ap must be >= 1")
        if self.num_pilots < 1:
            raise ValueError("num_pilots must be >= 1")
        if min(self.radius, self.ref_distance, self.pathloss_exp) <= 0:
            raise ValueError("radius, ref_distance, pathloss_exp must be > 0")
        if min(self.snr_dl, self.snr_ul) <= 0 or min(self.noise_dl, self.noise_ul) <= 0:
            raise ValueError("SNRs and noise powers must be > 0")
        if self.per_ap_budget is None:
            # default: every AP gets the full transmit budget snr_dl * noise_dl
            self.per_ap_budget = np.full(self.num_aps, self.snr_dl * self.noise_dl)
        else:
            self.per_ap_budget = np.asarray(self.per_ap_budget, dtype=float)
            if self.per_ap_budget.shape != (self.num_aps,):
                raise ValueError("per_ap_budget must have one entry per AP")
            if np.any(self.per_ap_budget <= 0):
                raise ValueError("per-AP budgets must be > 0")

    @property
    def total_antennas(self) -> int:
        return self.num_aps * self.antennas_per_ap


@dataclass
class Geometry:
    """One random drop: positions plus the resulting large-scale gains."""

    ue_pos: np.ndarray   # (K, 2) [m]
    ap_pos: np.ndarray   # (M, 2) [m]
    rho: np.ndarray      # (K, M) linear path gains


@dataclass
class PilotAssignment:
    """Round-robin pilot map; indices are 0-based internally."""

    pilot_of_ue: np.ndarray          # (K,) int, pilot index of each UE
    cohorts: list[np.ndarray]        # per pilot, the UE indices sharing it

    @property
    def num_pilots(self) -> int:
        return len(self.cohorts)


def path_gain(distance: np.ndarray | float, config: NetworkConfig) -> np.ndarray | float:
    """Power-law gain with the 1 m distance floor."""
    d = np.maximum(distance, DISTANCE_FLOOR)
    return (d / config.ref_distance) ** (-config.pathloss_exp)


def sample_geometry(config: NetworkConfig, seed: int) -> Geometry:
    """Drop UEs and APs uniformly on the disk and tabulate path gains."""
    rng = substream(seed, "geometry")
    n = config.num_ues + config.num_aps
    # uniform on a disk: radius ~ R*sqrt(U), angle uniform
    r = config.radius * np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    pos = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    ue_pos, ap_pos = pos[: config.num_ues], pos[config.num_ues :]
    dist = np.linalg.norm(ue_pos[:, None, :] - ap_pos[None, :, :], axis=2)
    return Geometry(ue_pos=ue_pos, ap_pos=ap_pos, rho=path_gain(dist, config))


def assign_pilots(config: NetworkConfig) -> PilotAssignment:
    """UE k (0-based) gets pilot k mod num_pilots."""
    pilots = np.arange(config.num_ues) % config.num_pilots
    cohorts = [np.flatnonzero(pilots == p) for p in range(config.num_pilots)]
    return PilotAssignment(pilot_of_ue=pilots, cohorts=cohorts)


def sample_true_channels(geometry: Geometry, config: NetworkConfig, seed: int) -> np.ndarray:
    """Draw the true channels h[k] ~ CN(0, diag of per-AP gains), stacked.

    Returns a (K, M * antennas_per_ap) complex array; AP i occupies columns
    [i*n_A, (i+1)*n_A).  Mainly a diagnostics path: the solvers consume the
    estimated statistics from estimation.sample_channel_set instead.
    """
    rng = substream(seed, "true_channels")
    K, M, nA = config.num_ues, config.num_aps, config.antennas_per_ap
    std = np.sqrt(np.repeat(geometry.rho, nA, axis=1) / 2.0)
    return std * (rng.standard_normal((K, M * nA)) + 1j * rng.standard_normal((K, M * nA)))
