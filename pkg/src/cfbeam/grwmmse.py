"""Per-AP block-coordinate descent on the WMMSE surrogate (G-R-WMMSE).

For fixed auxiliaries, restricting the weighted-MSE surrogate to the blocks
owned by AP i gives a ball-constrained quadratic in the stacked per-UE beams
v_{A,i} = [v_{0,i}; ...; v_{K-1,i}]:

    min  v^H Q_i v + 2 Re{b_i^H v}   s.t.  ||v||^2 <= P_i,
    Q_i = I_K (x) S_i + c_i I,   S_i = H_i A H_i^H,
    A   = diag(mu_k w_k |u_k|^2),  c_i = sum_k mu_k w_k |u_k|^2 rho_tilde[k,i],

where H_i collects the per-AP channel estimates column-wise.  The KKT system
is v = -(Q_i + lam I)^{-1} b_i with lam >= 0 picked so the ball constraint
and complementary slackness hold; because Q_i is a Kronecker shift of the
tiny n_A x n_A matrix S_i, one eigendecomposition of S_i turns every dual
evaluation into O(n_A) work and the whole block update into a scalar
bisection.  Two outer loops are provided: a Gauss-Seidel sweep (sequential)
and a damped Jacobi update where all APs respond to the same snapshot
(parallel), whose coupling totals make each AP's work independent of M.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .estimation import ChannelSet
from .rate_model import (
    WmmseAux,
    ap_view,
    budget_violation,
    per_ap_power,
    surrogate_objective,
    update_aux,
    weighted_sum_rate,
)
from .seeds import substream

# components of b (rotated to S_i's eigenbasis) smaller than this relative
# to ||b|| count as lying in a null space, not in it
_NULLSPACE_REL_TOL = 1e-12


@dataclass
class SolverConfig:
    """Knobs shared by both outer loops."""

    max_outer_iters: int = 500
    outer_tol: float | None = None   # Frobenius stop; None -> 1e-5 * sum(budgets)
    bisect_tol: float = 1e-13        # relative power accuracy of the dual bisection
    step_beta0: float = 1.0          # parallel mode: initial averaging step
    step_eps: float = 0.1            # parallel mode: step decay beta <- beta*(1 - eps*beta)
    mode: str = "sequential"         # "sequential" | "parallel"
    record_substeps: bool = False    # keep surrogate value after every block/aux update

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if not (0.0 < self.step_beta0 <= 1.0):
            raise ValueError("step_beta0 must lie in (0, 1]")
        if not (0.0 <= self.step_eps < 1.0):
            raise ValueError("step_eps must lie in [0, 1)")
        if self.mode not in ("sequential", "parallel"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def frobenius_tol(self, budgets: np.ndarray) -> float:
        return self.outer_tol if self.outer_tol is not None else 1e-5 * float(np.sum(budgets))


@dataclass
class SolverReport:
    """What a solver run hands back to the harness."""

    beamformer: np.ndarray           # (K, M * n_A)
    objective_trace: list[float]     # weighted sum-rate, initial point + one per iteration
    surrogate_trace: list[float]     # surrogate at the aux-update points, same length
    iterations: int
    wall_time_s: float
    converged: bool
    substep_surrogates: list[float] | None = None  # only when record_substeps


@dataclass
class SubproblemData:
    """One AP's quadratic, stored in factored (eigen) form.

    ``b`` keeps the per-UE blocks as rows; flatten row-major to get the
    stacked vector matching the Q_i block order.  ``b_rot`` holds U^H b per
    UE and ``spectral_weight[j]`` the total |b_rot|^2 mass on eigenvalue j,
    which is all the dual power curve needs.
    """

    s_matrix: np.ndarray             # (n_A, n_A) Hermitian PSD
    c: float                         # >= 0, error-floor diagonal shift
    b: np.ndarray                    # (K, n_A) linear-term blocks
    evals: np.ndarray = field(init=False)
    evecs: np.ndarray = field(init=False)
    b_rot: np.ndarray = field(init=False)
    spectral_weight: np.ndarray = field(init=False)

    def __post_init__(self):
        s = 0.5 * (self.s_matrix + self.s_matrix.conj().T)  # scrub fp asymmetry
        evals, evecs = np.linalg.eigh(s)
        self.s_matrix = s
        self.evals = np.maximum(evals, 0.0)
        self.evecs = evecs
        self.b_rot = self.b @ evecs.conj()
        self.spectral_weight = (np.abs(self.b_rot) ** 2).sum(axis=0)

    @property
    def num_ues(self) -> int:
        return self.b.shape[0]

    @property
    def n_ant(self) -> int:
        return self.b.shape[1]

    @property
    def b_flat(self) -> np.ndarray:
        return self.b.reshape(-1)

    def dense_quadratic(self) -> tuple[np.ndarray, np.ndarray]:
        """(Q, b) in dense form, for oracle cross-checks only."""
        K = self.num_ues
        Q = np.kron(np.eye(K), self.s_matrix) + self.c * np.eye(K * self.n_ant)
        return Q, self.b_flat


def _weight_vector(aux: WmmseAux, mu: np.ndarray) -> np.ndarray:
    """Diagonal of A: mu_k w_k |u_k|^2."""
    return mu * aux.w * np.abs(aux.u) ** 2


def build_subproblem(
    ap: int,
    v: np.ndarray,
    aux: WmmseAux,
    cs: ChannelSet,
    mu: np.ndarray,
) -> SubproblemData:
    """Assemble AP ``ap``'s quadratic, coupling against the other APs' blocks.

    The cross-AP term is rebuilt from the current iterate by summing over all
    other APs, which is the Gauss-Seidel data flow: the cost of one call
    grows linearly with M.
    """
    nA = cs.antennas_per_ap
    channels = ap_view(cs.h_hat, nA)   # (M, n_A, K)
    blocks = ap_view(v, nA)            # (M, n_A, K)
    a = _weight_vector(aux, mu)
    H_i = channels[ap]
    s_matrix = (H_i * a) @ H_i.conj().T
    c = float(a @ cs.rho_tilde[:, ap])
    cross = np.zeros((cs.num_ues, cs.num_ues), dtype=complex)
    for m in range(cs.num_aps):
        if m != ap:
            cross += channels[m].conj().T @ blocks[m]
    b_cols = -H_i * (mu * aux.w * aux.u) + (H_i * a) @ cross
    return SubproblemData(s_matrix=s_matrix, c=c, b=b_cols.T.copy())


def coupling_vector(v: np.ndarray, aux: WmmseAux, cs: ChannelSet, mu: np.ndarray) -> np.ndarray:
    """Network-wide coupling totals d, shared by every AP in parallel mode.

    Entry block l (column-major, length K each) is A H^H v_l summed over all
    APs; each AP later subtracts its own contribution locally, so building
    all M subproblems costs one pass over the network instead of M.
    """
    gains = np.conj(cs.h_hat) @ v.T            # (K, K): h_hat_k^H v_l
    d_matrix = _weight_vector(aux, mu)[:, None] * gains
    return d_matrix.ravel(order="F")


def build_subproblem_from_coupling(
    ap: int,
    v: np.ndarray,
    aux: WmmseAux,
    cs: ChannelSet,
    mu: np.ndarray,
    coupling: np.ndarray | None = None,
) -> SubproblemData:
    """Same quadratic as build_subproblem, via the shared coupling totals.

    With ``coupling`` precomputed the per-call work no longer depends on the
    number of APs.  Must agree with the direct route to fp accuracy.
    """
    nA = cs.antennas_per_ap
    K = cs.num_ues
    if coupling is None:
        coupling = coupling_vector(v, aux, cs, mu)
    d_matrix = coupling.reshape(K, K, order="F")
    a = _weight_vector(aux, mu)
    H_i = ap_view(cs.h_hat, nA)[ap]
    V_i = ap_view(v, nA)[ap]
    s_matrix = (H_i * a) @ H_i.conj().T
    c = float(a @ cs.rho_tilde[:, ap])
    own = a[:, None] * (H_i.conj().T @ V_i)
    b_cols = -H_i * (mu * aux.w * aux.u) + H_i @ (d_matrix - own)
    return SubproblemData(s_matrix=s_matrix, c=c, b=b_cols.T.copy())


def power_of_dual(sub: SubproblemData, lam: float) -> float:
    """||v(lam)||^2 of the dual candidate v(lam) = -(Q + lam I)^{-1} b.

    Strictly decreasing in lam wherever finite.  At singular shifts the
    pseudoinverse convention applies: null-space components of b (below the
    relative tolerance) contribute nothing; a genuine b-component on a zero
    eigenvalue makes the power infinite, which forces the constraint active.
    """
    denom = sub.evals + sub.c + lam
    null_tol = _NULLSPACE_REL_TOL**2 * max(float(sub.spectral_weight.sum()), 1e-300)
    total = 0.0
    for w, x in zip(sub.spectral_weight, denom):
        if x > 0.0:
            total += w / (x * x)
        elif w > null_tol:
            return float("inf")
    return total


def shifted_solve(sub: SubproblemData, lam: float) -> np.ndarray:
    """v = -(Q + lam I)^{-1} b through the Kronecker eigenstructure.

    Returns the stacked per-UE vector (length K * n_A).  Zero denominators
    follow pseudoinverse semantics, consistent with power_of_dual.
    """
    denom = sub.evals + sub.c + lam
    inv = np.zeros_like(denom)
    pos = denom > 0.0
    inv[pos] = 1.0 / denom[pos]
    x = sub.b_rot * inv
    return -(x @ sub.evecs.T).reshape(-1)


def solve_subproblem(
    sub: SubproblemData,
    power: float,
    power_tol: float = 1e-13,
) -> tuple[np.ndarray, float]:
    """Exact block update: the dual multiplier and the minimising stack.

    If the unconstrained (lam = 0) candidate already fits the budget it is
    optimal with lam = 0; otherwise lam* solves ||v(lam)||^2 = power by
    bisection on [0, ||b|| / sqrt(power)].  The returned iterate always sits
    on the feasible side of the budget.
    """
    if power <= 0:
        raise ValueError("power budget must be > 0")
    weight_total = float(sub.spectral_weight.sum())
    if weight_total == 0.0:
        return np.zeros(sub.num_ues * sub.n_ant, dtype=complex), 0.0
    if power_of_dual(sub, 0.0) <= power:
        return shifted_solve(sub, 0.0), 0.0

    lam_hi = float(np.sqrt(weight_total / power))  # p(lam_hi) <= power by construction
    width_tol = 1e-13 * lam_hi  # relative, so tiny-b problems stay accurate
    # bisection on plain floats; n_A is tiny so the python-level sum is cheap
    ws = [float(w) for w in sub.spectral_weight]
    xs = [float(x) for x in sub.evals + sub.c]
    lo, hi = 0.0, lam_hi
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        p_mid = 0.0
        for w, x in zip(ws, xs):
            d = x + mid
            p_mid += w / (d * d)
        if p_mid > power:
            lo = mid
        else:
            hi = mid
            if power - p_mid <= power_tol * power:
                break
    return shifted_solve(sub, hi), hi


def scaled_norm_solve(sub: SubproblemData, power: float) -> tuple[np.ndarray, float]:
    """Single-antenna shortcut: Q_i is alpha * I, so no bisection is needed.

    v = -b * min(1/alpha, sqrt(power)/||b||) with alpha = S_i + c_i; the dual
    multiplier follows from whichever branch is taken.
    """
    if sub.n_ant != 1:
        raise ValueError("scaled_norm_solve requires exactly one antenna per AP")
    if power <= 0:
        raise ValueError("power budget must be > 0")
    alpha = float(np.real(sub.s_matrix[0, 0])) + sub.c
    b = sub.b_flat
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), 0.0
    cap = np.sqrt(power) / b_norm
    if alpha > 0.0 and 1.0 / alpha <= cap:
        return -b / alpha, 0.0
    # budget bites: ||v|| = sqrt(power) and lam = ||b||/sqrt(power) - alpha
    return -b * cap, b_norm / np.sqrt(power) - alpha


def random_feasible_init(cs: ChannelSet, budgets: np.ndarray, seed: int) -> np.ndarray:
    """I.i.d. complex Gaussian design rescaled so each AP spends its budget."""
    rng = substream(seed, "init")
    K, n = cs.num_ues, cs.total_antennas
    v = rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n))
    scale = np.sqrt(budgets / per_ap_power(v, cs.antennas_per_ap))
    return v * np.repeat(scale, cs.antennas_per_ap)


def _check_init(v: np.ndarray, cs: ChannelSet, budgets: np.ndarray) -> np.ndarray:
    budgets = np.asarray(budgets, dtype=float)
    if budgets.shape != (cs.num_aps,):
        raise ValueError("budgets must have one entry per AP")
    if v.shape != (cs.num_ues, cs.total_antennas):
        raise ValueError("init beamformer has the wrong shape")
    if budget_violation(v, budgets, cs.antennas_per_ap) > 1e-9:
        raise ValueError("init beamformer violates a per-AP budget")
    return budgets


def run_sequential(
    cs: ChannelSet,
    mu: np.ndarray,
    budgets: np.ndarray,
    config: SolverConfig | None = None,
    init: np.ndarray | None = None,
) -> SolverReport:
    """Gauss-Seidel outer loop: sweep the APs in order, then refresh (u, w).

    Every block update is an exact constrained minimiser, so the surrogate is
    non-increasing across all block and aux updates and the weighted sum-rate
    is non-decreasing at the aux points.
    """
    config = config or SolverConfig()
    if init is None:
        init = random_feasible_init(cs, np.asarray(budgets, dtype=float), seed=0)
    budgets = _check_init(init, cs, budgets)
    nA = cs.antennas_per_ap
    K, M = cs.num_ues, cs.num_aps
    tol = config.frobenius_tol(budgets)

    t_start = time.perf_counter()
    v = init.astype(complex).copy()
    aux = update_aux(v, cs)
    wsr_trace = [weighted_sum_rate(v, cs, mu)]
    sur_trace = [surrogate_objective(v, aux, cs, mu)]
    substeps = [sur_trace[0]] if config.record_substeps else None

    iterations = 0
    converged = False
    for _ in range(config.max_outer_iters):
        iterations += 1
        v_prev = v.copy()
        for i in range(M):
            sub = build_subproblem(i, v, aux, cs, mu)
            block, _ = solve_subproblem(sub, budgets[i], config.bisect_tol)
            v[:, i * nA : (i + 1) * nA] = block.reshape(K, nA)
            if substeps is not None:
                substeps.append(surrogate_objective(v, aux, cs, mu))
        aux = update_aux(v, cs)
        if substeps is not None:
            substeps.append(surrogate_objective(v, aux, cs, mu))
        wsr_trace.append(weighted_sum_rate(v, cs, mu))
        sur_trace.append(surrogate_objective(v, aux, cs, mu))
        if float(np.sum(np.abs(v - v_prev) ** 2)) <= tol:
            converged = True
            break

    return SolverReport(
        beamformer=v,
        objective_trace=wsr_trace,
        surrogate_trace=sur_trace,
        iterations=iterations,
        wall_time_s=time.perf_counter() - t_start,
        converged=converged,
        substep_surrogates=substeps,
    )


def run_parallel(
    cs: ChannelSet,
    mu: np.ndarray,
    budgets: np.ndarray,
    config: SolverConfig | None = None,
    init: np.ndarray | None = None,
) -> SolverReport:
    """Damped Jacobi outer loop: all APs best-respond to the same snapshot.

    Per iteration the shared coupling totals are built once, every AP solves
    its subproblem against them (independent, order-free work), and the new
    design is the convex combination beta * best_response + (1-beta) * old.
    The step decays as beta <- beta * (1 - eps * beta) after every iteration
    that does not meet the stopping rule.  Feasibility survives the blend
    because each per-AP ball is convex.
    """
    config = config or SolverConfig()
    if init is None:
        init = random_feasible_init(cs, np.asarray(budgets, dtype=float), seed=0)
    budgets = _check_init(init, cs, budgets)
    nA = cs.antennas_per_ap
    K, M = cs.num_ues, cs.num_aps
    tol = config.frobenius_tol(budgets)

    t_start = time.perf_counter()
    v = init.astype(complex).copy()
    aux = update_aux(v, cs)
    beta = config.step_beta0
    wsr_trace = [weighted_sum_rate(v, cs, mu)]
    sur_trace = [surrogate_objective(v, aux, cs, mu)]
    substeps = [sur_trace[0]] if config.record_substeps else None

    iterations = 0
    converged = False
    for _ in range(config.max_outer_iters):
        iterations += 1
        v_prev = v.copy()
        coupling = coupling_vector(v, aux, cs, mu)
        best = np.empty_like(v)
        for i in range(M):
            sub = build_subproblem_from_coupling(i, v_prev, aux, cs, mu, coupling)
            block, _ = solve_subproblem(sub, budgets[i], config.bisect_tol)
            best[:, i * nA : (i + 1) * nA] = block.reshape(K, nA)
        v = beta * best + (1.0 - beta) * v_prev
        aux = update_aux(v, cs)
        if substeps is not None:
            substeps.append(surrogate_objective(v, aux, cs, mu))
        wsr_trace.append(weighted_sum_rate(v, cs, mu))
        sur_trace.append(surrogate_objective(v, aux, cs, mu))
        if float(np.sum(np.abs(v - v_prev) ** 2)) <= tol:
            converged = True
            break
        beta = beta * (1.0 - config.step_eps * beta)

    return SolverReport(
        beamformer=v,
        objective_trace=wsr_trace,
        surrogate_trace=sur_trace,
        iterations=iterations,
        wall_time_s=time.perf_counter() - t_start,
        converged=converged,
        substep_surrogates=substeps,
    )


def run(
    cs: ChannelSet,
    mu: np.ndarray,
    budgets: np.ndarray,
    config: SolverConfig | None = None,
    init: np.ndarray | None = None,
) -> SolverReport:
    """Dispatch on config.mode."""
    config = config or SolverConfig()
    runner = run_sequential if config.mode == "sequential" else run_parallel
    return runner(cs, mu, budgets, config, init)
