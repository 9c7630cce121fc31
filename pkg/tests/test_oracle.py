"""Independent reference implementations used to cross-check the fast paths."""

import numpy as np
import pytest

from cfbeam.oracle import (
    dense_shifted_inverse,
    mc_expected_rate,
    projected_gradient_qcqp,
    qcqp_objective,
)
from cfbeam.rate_model import expected_rate

from conftest import build_instance


def test_qcqp_objective_value():
    Q = np.diag([1.0, 2.0]).astype(complex)
    b = np.array([1.0 + 0j, -1.0])
    v = np.array([2.0 + 0j, 1.0j])
    # v^H Q v = 4 + 2; 2 Re b^H v = 2 * Re(2 + (-1)(1j)) = 4
    assert qcqp_objective(Q, b, v) == pytest.approx(10.0)


def test_projected_gradient_interior_solution():
    Q = np.eye(2, dtype=complex)
    b = np.array([-0.25 + 0j, 0.0])
    v = projected_gradient_qcqp(Q, b, power=1.0, tol=1e-14)
    assert np.allclose(v, [0.25, 0.0], atol=1e-6)


def test_projected_gradient_boundary_solution():
    # unconstrained minimiser -b has norm 3; ball radius 1 clips it radially
    Q = np.eye(2, dtype=complex)
    b = np.array([-3.0 + 0j, 0.0])
    v = projected_gradient_qcqp(Q, b, power=1.0, tol=1e-14)
    assert np.allclose(v, [1.0, 0.0], atol=1e-6)
    assert qcqp_objective(Q, b, v) == pytest.approx(1.0 - 6.0, abs=1e-6)


def test_projected_gradient_rejects_bad_budget():
    with pytest.raises(ValueError):
        projected_gradient_qcqp(np.eye(2, dtype=complex), np.zeros(2, dtype=complex), 0.0)


def test_dense_shifted_inverse_identity_case():
    Q = np.eye(3, dtype=complex)
    b = np.array([2.0 + 0j, -4.0, 6.0])
    assert np.allclose(dense_shifted_inverse(Q, 1.0, b), -b / 2.0)
    with pytest.raises(ValueError):
        dense_shifted_inverse(Q, -0.5, b)


def test_mc_rate_matches_closed_form_with_perfect_csi():
    # no estimation error: the expectation is over nothing, so the Monte
    # Carlo mean must sit on the closed form (within its own CI)
    inst = build_instance(seed=1, snr_ul_db=200.0, num_ues=3, num_aps=2)
    v = inst.init
    for k in range(inst.cs.num_ues):
        mean, margin = mc_expected_rate(v, inst.cs, k, num_draws=2000, seed=0)
        want = expected_rate(v, inst.cs, k)
        assert margin < 1e-6
        assert mean == pytest.approx(want, abs=1e-4)


def test_mc_rate_is_deterministic_given_seed():
    inst = build_instance(seed=2, num_ues=3, num_aps=2)
    a = mc_expected_rate(inst.init, inst.cs, 0, num_draws=500, seed=11)
    b = mc_expected_rate(inst.init, inst.cs, 0, num_draws=500, seed=11)
    c = mc_expected_rate(inst.init, inst.cs, 0, num_draws=500, seed=12)
    assert a == b
    assert a != c


def test_mc_rate_rejects_tiny_sample():
    inst = build_instance(seed=3)
    with pytest.raises(ValueError):
        mc_expected_rate(inst.init, inst.cs, 0, num_draws=50, seed=0)


def test_closed_form_sits_below_mc_mean():
    # the closed form treats the error floor as worst-case self-noise
    inst = build_instance(seed=4, snr_ul_db=0.0, num_pilots=2)
    for k in range(inst.cs.num_ues):
        mean, margin = mc_expected_rate(inst.init, inst.cs, k, num_draws=20_000, seed=5)
        assert expected_rate(inst.init, inst.cs, k) <= mean + margin
