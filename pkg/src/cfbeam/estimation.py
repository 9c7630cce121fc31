"""Uplink pilot estimation statistics and channel-state sampling.

The downlink solvers never see true channels, only the estimate h_hat and the
second-order error statistics.  With orthogonal pilots reused round-robin,
linear MMSE estimation of the UE-k/AP-i link gives a per-antenna estimate
variance

    rho_hat[k, i] = rho[k, i]**2 / (1/(L * snr_ul) + sum_{l in cohort(k)} rho[l, i])

where L is the pilot length, snr_ul the uplink pilot SNR and cohort(k) the set
of UEs sharing k's pilot (k included).  The estimation error is independent of
the estimate with per-antenna variance rho_tilde = rho - rho_hat, and the true
channel decomposes as h = h_hat + h_tilde.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Geometry, NetworkConfig, PilotAssignment
from .seeds import substream


@dataclass
class ChannelSet:
    """Everything one downlink design instance needs about the channels.

    Rows of ``h_hat`` are stacked estimates: UE k's row holds its length-n_A
    estimate at AP 0, then AP 1, ...  ``rho_tilde[k, i]`` is the per-antenna
    error variance of that block; the error covariance seen by UE k is the
    block-diagonal matrix with rho_tilde[k, i] * I_{n_A} on the AP-i block.
    """

    h_hat: np.ndarray       # (K, M * n_A) complex channel estimates
    rho: np.ndarray         # (K, M) true per-antenna channel variances
    rho_hat: np.ndarray     # (K, M) estimate variances
    rho_tilde: np.ndarray   # (K, M) error variances, rho - rho_hat
    antennas_per_ap: int
    noise_dl: float = 1.0   # downlink noise power at every UE
    h_true: np.ndarray | None = None  # (K, M * n_A), diagnostics only

    def __post_init__(self):
        K, M = self.rho.shape
        if self.h_hat.shape != (K, M * self.antennas_per_ap):
            raise ValueError("h_hat shape inconsistent with rho / antennas_per_ap")
        if self.rho_hat.shape != (K, M) or self.rho_tilde.shape != (K, M):
            raise ValueError("rho_hat / rho_tilde must match rho's shape")
        if np.any(self.rho_tilde < -1e-12):
            raise ValueError("negative error variance")
        if self.noise_dl <= 0:
            raise ValueError("noise_dl must be > 0")

    @property
    def num_ues(self) -> int:
        return self.rho.shape[0]

    @property
    def num_aps(self) -> int:
        return self.rho.shape[1]

    @property
    def total_antennas(self) -> int:
        return self.num_aps * self.antennas_per_ap


def estimate_variance(rho: np.ndarray, pilots: PilotAssignment, config: NetworkConfig) -> np.ndarray:
    """Per-antenna MMSE estimate variances rho_hat, shape (K, M).

    The denominator couples all UEs in the same pilot cohort: contamination
    steals estimate quality.  rho_hat <= rho always (the cohort sum includes
    UE k itself), with equality only in the noiseless uncontaminated limit.
    """
    K, M = rho.shape
    L = config.num_pilots
    # cohort_gain[p, i] = total gain at AP i of the UEs on pilot p
    cohort_gain = np.zeros((L, M))
    for p, members in enumerate(pilots.cohorts):
        if len(members):
            cohort_gain[p] = rho[members].sum(axis=0)
    denom = 1.0 / (L * config.snr_ul) + cohort_gain[pilots.pilot_of_ue]
    return rho**2 / denom


def sample_channel_set(
    geometry: Geometry,
    pilots: PilotAssignment,
    config: NetworkConfig,
    seed: int,
) -> ChannelSet:
    """Draw one estimated-channel snapshot for the given drop.

    h_hat and h_tilde are drawn independently (their exact joint law under
    MMSE estimation), and h_true = h_hat + h_tilde is kept for diagnostics.
    """
    rng = substream(seed, "channels")
    K, M, nA = config.num_ues, config.num_aps, config.antennas_per_ap
    rho = geometry.rho
    rho_hat = estimate_variance(rho, pilots, config)
    rho_tilde = np.maximum(rho - rho_hat, 0.0)  # clip fp dust

    def draw(var_km: np.ndarray) -> np.ndarray:
        std = np.sqrt(np.repeat(var_km, nA, axis=1) / 2.0)
        re = rng.standard_normal((K, M * nA))
        im = rng.standard_normal((K, M * nA))
        return std * (re + 1j * im)

    h_hat = draw(rho_hat)
    h_tilde = draw(rho_tilde)
    return ChannelSet(
        h_hat=h_hat,
        rho=rho,
        rho_hat=rho_hat,
        rho_tilde=rho_tilde,
        antennas_per_ap=nA,
        noise_dl=config.noise_dl,
        h_true=h_hat + h_tilde,
    )
