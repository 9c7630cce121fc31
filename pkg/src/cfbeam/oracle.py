"""Slow reference implementations used to validate the fast solver paths.

Nothing here shares code with the production routes: the QCQP oracle is plain
projected gradient descent on the dense quadratic, the rate oracle draws
error realisations instead of using the closed form, and the shifted inverse
factorises the full matrix.  Tests compare the fast paths against these.
"""

from __future__ import annotations

import numpy as np

from .estimation import ChannelSet
from .seeds import substream


def qcqp_objective(Q: np.ndarray, b: np.ndarray, v: np.ndarray) -> float:
    """The ball-constrained subproblem objective v^H Q v + 2 Re{b^H v}."""
    return float(np.real(np.vdot(v, Q @ v)) + 2.0 * np.real(np.vdot(b, v)))


def projected_gradient_qcqp(
    Q: np.ndarray,
    b: np.ndarray,
    power: float,
    tol: float = 1e-10,
    max_iters: int = 200_000,
) -> np.ndarray:
    """Minimise v^H Q v + 2 Re{b^H v} subject to ||v||^2 <= power.

    Accelerated projected gradient (momentum restarts whenever the objective
    rises) with step 1/(2*lambda_max(Q) + 1).  The momentum matters: plain
    descent crawls along near-flat directions of Q and can stall far from
    the minimiser.  Convergence is declared on the fixed-point residual
    ||v - P(v - step * grad)|| <= tol * (1 + ||v||).
    """
    if power <= 0:
        raise ValueError("power budget must be > 0")
    Q = np.asarray(Q)
    b = np.asarray(b).ravel()
    lam_max = float(np.linalg.eigvalsh(Q).max()) if Q.size else 0.0
    step = 1.0 / (2.0 * max(lam_max, 0.0) + 1.0)
    radius = np.sqrt(power)

    def project(x: np.ndarray) -> np.ndarray:
        nrm = np.linalg.norm(x)
        return x * (radius / nrm) if nrm > radius else x

    v = np.zeros_like(b, dtype=complex)
    y = v
    f = qcqp_objective(Q, b, v)
    t = 1.0
    for _ in range(max_iters):
        v_next = project(y - step * 2.0 * (Q @ y + b))
        f_next = qcqp_objective(Q, b, v_next)
        if f_next > f:  # momentum overshot: restart from the last good point
            t = 1.0
            y = v
            v_next = project(v - step * 2.0 * (Q @ v + b))
            f_next = qcqp_objective(Q, b, v_next)
        residual = float(np.linalg.norm(v_next - v))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = v_next + ((t - 1.0) / t_next) * (v_next - v)
        v, f, t = v_next, f_next, t_next
        if residual <= tol * (1.0 + float(np.linalg.norm(v))):
            break
    return v


def dense_shifted_inverse(Q: np.ndarray, lam: float, b: np.ndarray) -> np.ndarray:
    """v = -(Q + lam*I)^{-1} b via a dense factorisation (no structure used)."""
    if lam < 0:
        raise ValueError("shift must be >= 0")
    n = Q.shape[0]
    return -np.linalg.solve(Q + lam * np.eye(n), np.asarray(b).ravel())


def mc_expected_rate(
    v: np.ndarray,
    cs: ChannelSet,
    k: int,
    num_draws: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of UE k's expected rate and its 95% CI half-width.

    Each draw realises the estimation error h_tilde_k, treats the estimated
    direction as the useful signal and everything else (cross beams through
    the realised channel, the error leaking k's own beam, noise) as
    interference, and averages the instantaneous log rates.  By Jensen the
    closed-form expected_rate lower-bounds this mean.
    """
    if num_draws < 100:
        raise ValueError("num_draws < 100 gives a meaningless confidence interval")
    rng = substream(seed, "mc_rate")
    nA = cs.antennas_per_ap
    std = np.sqrt(np.repeat(cs.rho_tilde[k], nA) / 2.0)
    err = std * (
        rng.standard_normal((num_draws, cs.total_antennas))
        + 1j * rng.standard_normal((num_draws, cs.total_antennas))
    )
    fixed = np.conj(cs.h_hat[k]) @ v.T          # (K,) estimate-side gains
    wobble = np.conj(err) @ v.T                 # (num_draws, K) error-side gains
    signal = np.abs(fixed[k]) ** 2
    cross = np.abs(fixed[None, :] + wobble) ** 2
    inst_if = cross.sum(axis=1) - cross[:, k] + np.abs(wobble[:, k]) ** 2
    rates = np.log2(1.0 + signal / (inst_if + cs.noise_dl))
    mean = float(rates.mean())
    half_width = float(1.96 * rates.std(ddof=1) / np.sqrt(num_draws))
    return mean, half_width
