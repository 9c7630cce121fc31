"""Quick invariant battery behind `cfbeam selftest`.

Small instances, a few seconds total: structural identities (Kronecker solve
vs dense, coupling routes, single-antenna shortcut), optimisation behaviour
(surrogate monotone, subproblem vs projected-gradient oracle), feasibility of
every solver's output, and the rate model against its Monte Carlo oracle.
The heavyweight statistical acceptance runs live in the test suite, not here.
"""

from __future__ import annotations

import numpy as np

from . import grwmmse, oracle, rate_model
from .harness import Instance, db_to_linear, make_instance, solve_by_name
from .scenario import NetworkConfig


def _small_instance(seed: int, **overrides) -> Instance:
    cfg = dict(num_ues=4, num_aps=3, antennas_per_ap=2, num_pilots=3,
               snr_dl=db_to_linear(14.0), snr_ul=db_to_linear(6.0))
    cfg.update(overrides)
    return make_instance(NetworkConfig(**cfg), seed=seed, weighted=True)


def _subproblem(inst: Instance, ap: int = 0) -> grwmmse.SubproblemData:
    aux = rate_model.update_aux(inst.init, inst.cs)
    return grwmmse.build_subproblem(ap, inst.init, aux, inst.cs, inst.mu)


def check_kron_solve_matches_dense() -> None:
    for seed in range(4):
        inst = _small_instance(seed)
        sub = _subproblem(inst, ap=seed % inst.cs.num_aps)
        Q, b = sub.dense_quadratic()
        for lam in (0.0, 0.37, 4.2):
            fast = grwmmse.shifted_solve(sub, lam)
            slow = oracle.dense_shifted_inverse(Q, lam, b)
            assert np.linalg.norm(fast - slow) <= 1e-10 * (1 + np.linalg.norm(slow))


def check_single_antenna_shortcut() -> None:
    for seed in range(4):
        inst = _small_instance(seed, antennas_per_ap=1)
        sub = _subproblem(inst)
        p = float(inst.budgets[0])
        v_gen, lam_gen = grwmmse.solve_subproblem(sub, p)
        v_fast, lam_fast = grwmmse.scaled_norm_solve(sub, p)
        assert np.linalg.norm(v_gen - v_fast) <= 1e-9 * (1 + np.linalg.norm(v_fast))
        assert abs(lam_gen - lam_fast) <= 1e-6 * (1 + abs(lam_fast))


def check_coupling_routes_agree() -> None:
    for seed in range(4):
        inst = _small_instance(seed)
        aux = rate_model.update_aux(inst.init, inst.cs)
        for ap in range(inst.cs.num_aps):
            direct = grwmmse.build_subproblem(ap, inst.init, aux, inst.cs, inst.mu)
            via_d = grwmmse.build_subproblem_from_coupling(ap, inst.init, aux, inst.cs, inst.mu)
            err = np.linalg.norm(direct.b - via_d.b)
            assert err <= 1e-10 * (1 + np.linalg.norm(direct.b))


def check_sequential_monotone() -> None:
    for seed in range(3):
        inst = _small_instance(seed)
        cfg = grwmmse.SolverConfig(max_outer_iters=20, record_substeps=True)
        rep = grwmmse.run_sequential(inst.cs, inst.mu, inst.budgets, cfg, inst.init)
        s = np.array(rep.substep_surrogates)
        scale = np.maximum(1.0, np.abs(s[:-1]))
        assert np.all(np.diff(s) <= 1e-9 * scale), "surrogate increased"
        w = np.array(rep.objective_trace)
        assert np.all(np.diff(w) >= -1e-9 * np.maximum(1.0, np.abs(w[:-1]))), "sum rate dropped"


def check_subproblem_vs_pgd() -> None:
    for seed in range(3):
        inst = _small_instance(seed)
        sub = _subproblem(inst, ap=1)
        p = float(inst.budgets[1])
        v_fast, _ = grwmmse.solve_subproblem(sub, p)
        Q, b = sub.dense_quadratic()
        v_ref = oracle.projected_gradient_qcqp(Q, b, p, tol=1e-12)
        f_fast = oracle.qcqp_objective(Q, b, v_fast)
        f_ref = oracle.qcqp_objective(Q, b, v_ref)
        assert f_fast <= f_ref + 1e-6 * max(1.0, abs(f_ref))


def check_all_solvers_feasible() -> None:
    for seed in (0, 1):
        inst = _small_instance(seed, num_ues=3)
        for name in ("wmmse", "grwmmse_seq", "grwmmse_par", "grwmmse_seq_nonrobust", "zf", "mrt"):
            rep = solve_by_name(name, inst, grwmmse.SolverConfig(max_outer_iters=15))
            viol = rate_model.budget_violation(rep.beamformer, inst.budgets, inst.cs.antennas_per_ap)
            assert viol <= 1e-9, f"{name} exceeds a budget by {viol:.2e}"


def check_aux_tightness() -> None:
    inst = _small_instance(5)
    aux = rate_model.update_aux(inst.init, inst.cs)
    sur = rate_model.surrogate_objective(inst.init, aux, inst.cs, inst.mu)
    wsr = rate_model.weighted_sum_rate(inst.init, inst.cs, inst.mu)
    gap = abs(sur - (inst.mu.sum() / rate_model.LN2 - wsr))
    assert gap <= 1e-10 * max(1.0, abs(sur))


def check_rate_lower_bounds_mc() -> None:
    inst = _small_instance(7)
    for k in range(2):
        closed = rate_model.expected_rate(inst.init, inst.cs, k)
        mean, half = oracle.mc_expected_rate(inst.init, inst.cs, k, num_draws=20_000, seed=k)
        assert closed <= mean + half, f"closed form {closed} above MC band {mean}+{half}"


CHECKS = [
    check_kron_solve_matches_dense,
    check_single_antenna_shortcut,
    check_coupling_routes_agree,
    check_sequential_monotone,
    check_subproblem_vs_pgd,
    check_all_solvers_feasible,
    check_aux_tightness,
    check_rate_lower_bounds_mc,
]


def run_selftest(verbose: bool = True) -> int:
    """Run every check; returns the number of failures (0 = all good)."""
    failures = 0
    for check in CHECKS:
        name = check.__name__.removeprefix("check_")
        try:
            check()
        except AssertionError as exc:
            failures += 1
            if verbose:
                print(f"FAIL  {name}: {exc}")
        else:
            if verbose:
                print(f"ok    {name}")
    return failures
