"""Ergodic rate model, MSE surrogate, and beamformer layout helpers.

Beamformer convention (shared package-wide): a design is a complex array of
shape (K, M * n_A); row k is UE k's stacked beam, with AP i owning columns
[i*n_A, (i+1)*n_A).  The per-AP stack used by the block solvers is the
(K, n_A) slice of those columns, flattened row-major (UE 0's block first).

With estimates h_hat and independent per-antenna error variances rho_tilde,
UE k's expected downlink rate is

    R_k = log2(1 + |h_hat_k^H v_k|^2 / (IF_k + N0)),
    IF_k = sum_{l != k} |h_hat_k^H v_l|^2 + sum_l sum_i rho_tilde[k,i] ||v_{l,i}||^2,

i.e. the estimation error contributes an extra self- and cross-interference
floor.  The WMMSE surrogate replaces each log term by its variational upper
bound in the receive scalar u_k and weight w_k > 0; both have closed-form
minimisers, and at those minimisers the surrogate touches the true weighted
sum-rate (tightness is what the block solvers exploit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import ChannelSet
from .seeds import substream

LN2 = float(np.log(2.0))


# ----------------------------------------------------------------- layout --

def ap_view(mat: np.ndarray, n_ant: int) -> np.ndarray:
    """(K, M*n_A) row-stacked array -> (M, n_A, K) per-AP matrices.

    For channels this yields, per AP i, the matrix whose column k is UE k's
    length-n_A block at that AP.
    """
    K, total = mat.shape
    M = total // n_ant
    return mat.reshape(K, M, n_ant).transpose(1, 2, 0)


def per_ap_power(v: np.ndarray, n_ant: int) -> np.ndarray:
    """Transmit power each AP spends: sum over UEs of its block's norm^2."""
    K, total = v.shape
    M = total // n_ant
    return (np.abs(v) ** 2).reshape(K, M, n_ant).sum(axis=(0, 2))


def budget_violation(v: np.ndarray, budgets: np.ndarray, n_ant: int) -> float:
    """Largest relative per-AP budget overshoot (<= 0 means feasible)."""
    p = per_ap_power(v, n_ant)
    return float(np.max((p - budgets) / budgets))


# ------------------------------------------------------------- rate model --

def signal_and_interference(v: np.ndarray, cs: ChannelSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-UE useful-signal amplitude s_k = h_hat_k^H v_k and floor IF_k."""
    gains = np.conj(cs.h_hat) @ v.T          # gains[k, l] = h_hat_k^H v_l
    s = np.diag(gains)
    err_floor = cs.rho_tilde @ per_ap_power(v, cs.antennas_per_ap)
    interference = (np.abs(gains) ** 2).sum(axis=1) - np.abs(s) ** 2 + err_floor
    return s, interference


def interference_power(v: np.ndarray, cs: ChannelSet, k: int) -> float:
    """IF_k: cross-beam leakage plus the estimation-error power floor."""
    _, interference = signal_and_interference(v, cs)
    return float(interference[k])


def user_rates(v: np.ndarray, cs: ChannelSet) -> np.ndarray:
    """Expected rate of every UE, bits/s/Hz."""
    s, interference = signal_and_interference(v, cs)
    return np.log2(1.0 + np.abs(s) ** 2 / (interference + cs.noise_dl))


def expected_rate(v: np.ndarray, cs: ChannelSet, k: int) -> float:
    return float(user_rates(v, cs)[k])


def weighted_sum_rate(v: np.ndarray, cs: ChannelSet, mu: np.ndarray) -> float:
    return float(mu @ user_rates(v, cs))


# ---------------------------------------------------------- WMMSE pieces --

@dataclass
class WmmseAux:
    """Receive scalars u and positive weights w, one pair per UE."""

    u: np.ndarray  # (K,) complex
    w: np.ndarray  # (K,) real, >= 1 at the closed-form update


def mse(v: np.ndarray, cs: ChannelSet, u_k: complex, k: int) -> float:
    """Mean-square error of UE k's symbol estimate under receive scalar u_k."""
    s, interference = signal_and_interference(v, cs)
    return float(
        np.abs(1.0 - np.conj(u_k) * s[k]) ** 2
        + np.abs(u_k) ** 2 * (interference[k] + cs.noise_dl)
    )


def update_aux(v: np.ndarray, cs: ChannelSet) -> WmmseAux:
    """Closed-form minimisers of the surrogate for fixed beams.

    u_k is the MMSE receive scalar; w_k = 1 / MSE_k(u_k) which is also the
    SINR+1 of UE k.  A zero beam gives (u, w) = (0, 1).
    """
    s, interference = signal_and_interference(v, cs)
    denom = np.abs(s) ** 2 + interference + cs.noise_dl
    if np.any(denom <= 0):
        raise ValueError("degenerate instance: nonpositive MMSE denominator")
    u = s / denom
    w = denom / (interference + cs.noise_dl)
    if np.any(w <= 0):
        raise ValueError("degenerate instance: nonpositive WMMSE weight")
    return WmmseAux(u=u, w=w)


def surrogate_objective(v: np.ndarray, aux: WmmseAux, cs: ChannelSet, mu: np.ndarray) -> float:
    """Weighted-MSE surrogate; equals sum(mu)/ln2 - WSR at the aux update."""
    s, interference = signal_and_interference(v, cs)
    mses = (
        np.abs(1.0 - np.conj(aux.u) * s) ** 2
        + np.abs(aux.u) ** 2 * (interference + cs.noise_dl)
    )
    return float(np.sum(mu * ((aux.w / LN2) * mses - np.log2(aux.w))))


def random_weights(num_ues: int, seed: int) -> np.ndarray:
    """Uniform rate weights normalised so they sum to num_ues."""
    rng = substream(seed, "weights")
    while True:
        draw = rng.random(num_ues)
        total = draw.sum()
        if total > 0:
            return num_ues * draw / total
