"""Reference designs: conventional WMMSE, zero-forcing, matched filter.

The conventional WMMSE beam update solves the same weighted-MSE minimisation
as grwmmse but jointly over the full stacked network beamformer, handling the
per-AP budgets through their Lagrange multipliers: for fixed multipliers the
minimiser is a single regularised solve

    v_k = (sum_l mu_l w_l |u_l|^2 (h_l h_l^H + E_l) + blkdiag(lam_i I))^{-1}
          mu_k w_k u_k h_k,

and the multipliers climb the concave dual by projected gradient ascent
(gradient = per-AP power minus budget).  This is deliberately the plain,
unaccelerated design: multipliers cold-start at zero each beam update, the
step starts at 1/max_i P_i and only ever halves when a step would decrease
the dual.  It is the runtime yardstick the block solvers are measured
against, so no warm starts or clever steps.

Zero-forcing inverts the estimate Gram matrix to null cross-UE leakage;
matched filtering points each beam along its own estimate.  Both use equal
per-UE beam norms and one global scale chosen so the most-loaded AP spends
exactly its budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .estimation import ChannelSet
from .grwmmse import SolverConfig, SolverReport, random_feasible_init, _check_init
from .rate_model import (
    WmmseAux,
    per_ap_power,
    surrogate_objective,
    update_aux,
    weighted_sum_rate,
)

DUAL_ITER_CAP = 2000
DUAL_KKT_TOL = 1e-6


@dataclass
class DualState:
    """Multiplier trajectory of one conventional beam update."""

    lam: np.ndarray          # (M,) final multipliers
    step: float              # final step size
    history: list[float]     # dual value after every accepted ascent step
    iterations: int
    converged: bool


def _rescale_into_budgets(v: np.ndarray, budgets: np.ndarray, n_ant: int) -> np.ndarray:
    """Shrink any over-budget AP block onto its budget sphere (never grows)."""
    p = per_ap_power(v, n_ant)
    scale = np.where(p > budgets, np.sqrt(budgets / np.maximum(p, 1e-300)), 1.0)
    return v * np.repeat(scale, n_ant)


def wmmse_beam_update(
    cs: ChannelSet,
    aux: WmmseAux,
    mu: np.ndarray,
    budgets: np.ndarray,
    max_dual_iters: int = DUAL_ITER_CAP,
    kkt_tol: float = DUAL_KKT_TOL,
) -> tuple[np.ndarray, DualState]:
    """One joint beam update under per-AP budgets, by dual ascent.

    Returns the new beamformer (rescaled onto the budgets, so always
    feasible) and the dual trajectory.  Non-convergence within the iteration
    cap is flagged on the DualState, with the best feasible iterate returned.
    """
    budgets = np.asarray(budgets, dtype=float)
    nA = cs.antennas_per_ap
    K, M, N = cs.num_ues, cs.num_aps, cs.total_antennas
    a = mu * aux.w * np.abs(aux.u) ** 2
    # fixed part of the regularised Gram: sum_l a_l (h_l h_l^H + E_l)
    base = (cs.h_hat.T * a) @ np.conj(cs.h_hat)
    base += np.diag(np.repeat(a @ cs.rho_tilde, nA))
    rhs = (cs.h_hat * (mu * aux.w * aux.u)[:, None]).T  # (N, K), col k = mu_k w_k u_k h_k

    def solve_for(lam: np.ndarray) -> np.ndarray:
        G = base + np.diag(np.repeat(lam, nA))
        try:
            return np.linalg.solve(G, rhs)
        except np.linalg.LinAlgError:
            # singular only in degenerate corners (e.g. zero aux); least squares
            return np.linalg.lstsq(G, rhs, rcond=None)[0]

    def dual_value(V: np.ndarray, lam: np.ndarray) -> float:
        return float(-np.sum(np.real(np.conj(rhs) * V)) - lam @ budgets)

    lam = np.zeros(M)
    step = 1.0 / float(budgets.max())
    V = solve_for(lam)
    g = dual_value(V, lam)
    history = [g]

    converged = False
    iterations = 0
    for _ in range(max_dual_iters):
        p = per_ap_power(V.T, nA)
        feasible = np.max((p - budgets) / budgets) <= kkt_tol
        slack = np.max(lam * np.abs(p - budgets) / ((1.0 + lam) * budgets)) <= kkt_tol
        if feasible and slack:
            converged = True
            break
        iterations += 1
        grad = p - budgets
        while True:
            lam_try = np.maximum(lam + step * grad, 0.0)
            V_try = solve_for(lam_try)
            g_try = dual_value(V_try, lam_try)
            if g_try >= g - 1e-12 * (1.0 + abs(g)) or step <= 1e-18:
                break
            step *= 0.5  # the trial step decreased the dual: halve and retry
        lam, V, g = lam_try, V_try, g_try
        history.append(g)

    v = _rescale_into_budgets(V.T, budgets, nA)
    return v, DualState(lam=lam, step=step, history=history, iterations=iterations, converged=converged)


def run_conventional(
    cs: ChannelSet,
    mu: np.ndarray,
    budgets: np.ndarray,
    config: SolverConfig | None = None,
    init: np.ndarray | None = None,
) -> SolverReport:
    """Full conventional WMMSE loop: joint beam update, then aux refresh.

    Shares the stopping rule (Frobenius change of the design) and the report
    format with the block solvers so the harness can time them side by side.
    """
    config = config or SolverConfig()
    if init is None:
        init = random_feasible_init(cs, np.asarray(budgets, dtype=float), seed=0)
    budgets = _check_init(init, cs, budgets)
    tol = config.frobenius_tol(budgets)

    t_start = time.perf_counter()
    v = init.astype(complex).copy()
    aux = update_aux(v, cs)
    wsr_trace = [weighted_sum_rate(v, cs, mu)]
    sur_trace = [surrogate_objective(v, aux, cs, mu)]

    iterations = 0
    converged = False
    for _ in range(config.max_outer_iters):
        iterations += 1
        v_prev = v
        v, _dual = wmmse_beam_update(cs, aux, mu, budgets)
        aux = update_aux(v, cs)
        wsr_trace.append(weighted_sum_rate(v, cs, mu))
        sur_trace.append(surrogate_objective(v, aux, cs, mu))
        if float(np.sum(np.abs(v - v_prev) ** 2)) <= tol:
            converged = True
            break

    # converged reports the outer stopping rule, same as the block solvers;
    # per-update dual convergence is visible on the DualState if needed
    return SolverReport(
        beamformer=v,
        objective_trace=wsr_trace,
        surrogate_trace=sur_trace,
        iterations=iterations,
        wall_time_s=time.perf_counter() - t_start,
        converged=converged,
    )


def _anchor_scale(v: np.ndarray, budgets: np.ndarray, n_ant: int) -> np.ndarray:
    """One global factor so the most-loaded AP meets its budget exactly."""
    p = per_ap_power(v, n_ant)
    active = p > 0
    if not np.any(active):
        return v
    return v * np.sqrt(np.min(budgets[active] / p[active]))


def zf_precoder(cs: ChannelSet, budgets: np.ndarray) -> np.ndarray:
    """Zero-forcing on the estimates: h_hat_k^H v_l = 0 for l != k.

    Directions are the Gram-inverse columns, normalised to equal per-UE
    power, then anchored to the tightest AP budget.  Raises if the estimate
    matrix cannot support nulling (more UEs than antennas, or a numerically
    rank-deficient Gram matrix).
    """
    budgets = np.asarray(budgets, dtype=float)
    K, N = cs.num_ues, cs.total_antennas
    if K > N:
        raise ValueError(f"zero-forcing infeasible: {K} UEs exceed {N} antennas")
    cols = cs.h_hat.T  # (N, K), column k = h_hat_k
    gram = cols.conj().T @ cols
    eig = np.linalg.eigvalsh(gram)
    if eig[0] <= 1e-12 * max(eig[-1], 1e-300):
        raise ValueError("zero-forcing infeasible: channel estimates are rank deficient")
    dirs = cols @ np.linalg.inv(gram)
    dirs /= np.linalg.norm(dirs, axis=0)
    return _anchor_scale(dirs.T, budgets, cs.antennas_per_ap)


def mrt_precoder(cs: ChannelSet, budgets: np.ndarray) -> np.ndarray:
    """Matched filter: beam along the own-channel estimate, same scaling rule.

    A UE with an exactly zero estimate gets a zero beam.
    """
    budgets = np.asarray(budgets, dtype=float)
    dirs = cs.h_hat.copy()
    norms = np.linalg.norm(dirs, axis=1)
    live = norms > 0
    dirs[live] /= norms[live, None]
    return _anchor_scale(dirs, budgets, cs.antennas_per_ap)


def non_robust_view(cs: ChannelSet) -> ChannelSet:
    """The same instance with the error statistics hidden (rho_tilde = 0).

    Feeding this view to a solver makes it treat estimates as perfect;
    evaluate the result against the original cs to quantify what ignoring
    estimation error costs.  Idempotent, and h_hat is shared unchanged.
    """
    return replace(cs, rho_tilde=np.zeros_like(cs.rho_tilde))
