"""Estimation statistics: variance split, contamination, sampled moments."""

import numpy as np
import pytest

from cfbeam.estimation import estimate_variance, sample_channel_set
from cfbeam.scenario import Geometry, NetworkConfig, assign_pilots, sample_geometry

from conftest import build_config


def _geometry_with_rho(rho: np.ndarray) -> Geometry:
    K, M = rho.shape
    return Geometry(ue_pos=np.zeros((K, 2)), ap_pos=np.zeros((M, 2)), rho=rho)


def test_single_ue_variance_value():
    # one UE alone on its pilot, unit gain, L=10, snr_ul=10:
    # rho_hat = 1 / (1/(10*10) + 1) = 1/1.01
    cfg = NetworkConfig(num_ues=1, num_aps=1, num_pilots=10, snr_ul=10.0)
    pa = assign_pilots(cfg)
    rho = np.array([[1.0]])
    rho_hat = estimate_variance(rho, pa, cfg)
    assert rho_hat[0, 0] == pytest.approx(1.0 / 1.01, rel=1e-12)


def test_variance_approaches_truth_without_noise_or_contamination():
    cfg = NetworkConfig(num_ues=1, num_aps=2, num_pilots=4, snr_ul=1e12)
    pa = assign_pilots(cfg)
    rho = np.array([[0.7, 0.02]])
    rho_hat = estimate_variance(rho, pa, cfg)
    assert np.allclose(rho_hat, rho, rtol=1e-9)


def test_contamination_reduces_estimate_quality():
    # two UEs; compare UE 0's estimate variance with and without a pilot twin
    rho = np.array([[1.0, 0.3], [0.5, 0.8]])
    cfg_shared = NetworkConfig(num_ues=2, num_aps=2, num_pilots=1, snr_ul=10.0)
    cfg_clean = NetworkConfig(num_ues=2, num_aps=2, num_pilots=2, snr_ul=10.0)
    shared = estimate_variance(rho, assign_pilots(cfg_shared), cfg_shared)
    clean = estimate_variance(rho, assign_pilots(cfg_clean), cfg_clean)
    assert np.all(shared < clean)


def test_estimate_variance_never_exceeds_truth():
    rng = np.random.default_rng(0)
    for _ in range(20):
        K, M, L = rng.integers(1, 8), rng.integers(1, 6), rng.integers(1, 5)
        cfg = NetworkConfig(num_ues=int(K), num_aps=int(M), num_pilots=int(L),
                            snr_ul=float(rng.uniform(0.1, 100)))
        rho = rng.uniform(1e-4, 5.0, size=(K, M))
        rho_hat = estimate_variance(rho, assign_pilots(cfg), cfg)
        assert np.all(rho_hat <= rho + 1e-15)
        assert np.all(rho_hat > 0)


def test_channel_set_shapes_and_split():
    cfg = build_config(num_ues=5, num_aps=4, antennas_per_ap=3)
    geom = sample_geometry(cfg, seed=2)
    cs = sample_channel_set(geom, assign_pilots(cfg), cfg, seed=2)
    assert cs.h_hat.shape == (5, 12)
    assert cs.h_true.shape == (5, 12)
    assert np.allclose(cs.rho_hat + cs.rho_tilde, cs.rho)
    assert np.all(cs.rho_tilde >= 0)
    assert cs.num_ues == 5 and cs.num_aps == 4 and cs.total_antennas == 12


def test_sampled_moments_and_independence():
    cfg = build_config(num_ues=2, num_aps=2, antennas_per_ap=1, num_pilots=1)
    geom = sample_geometry(cfg, seed=3)
    pa = assign_pilots(cfg)
    hats, tildes = [], []
    for s in range(4000):
        cs = sample_channel_set(geom, pa, cfg, seed=s)
        hats.append(cs.h_hat)
        tildes.append(cs.h_true - cs.h_hat)
    hats, tildes = np.stack(hats), np.stack(tildes)
    cs0 = sample_channel_set(geom, pa, cfg, seed=0)
    assert np.allclose(np.mean(np.abs(hats) ** 2, axis=0), cs0.rho_hat, rtol=0.1)
    assert np.allclose(np.mean(np.abs(tildes) ** 2, axis=0), cs0.rho_tilde, rtol=0.1)
    # error uncorrelated with estimate
    cross = np.abs(np.mean(hats * np.conj(tildes), axis=0))
    assert np.all(cross < 0.05 * np.sqrt(cs0.rho_hat * np.maximum(cs0.rho_tilde, 1e-12)) + 1e-3)


def test_perfect_csi_degenerates_cleanly():
    # with effectively infinite pilot SNR and no contamination, h_true == h_hat
    cfg = build_config(num_ues=2, num_aps=2, antennas_per_ap=2, num_pilots=2, snr_ul_db=200.0)
    geom = sample_geometry(cfg, seed=5)
    cs = sample_channel_set(geom, assign_pilots(cfg), cfg, seed=5)
    assert np.max(cs.rho_tilde) <= 1e-9 * np.max(cs.rho)
    assert np.allclose(cs.h_true, cs.h_hat, atol=1e-4)


def test_channel_set_rejects_bad_shapes():
    cfg = build_config()
    geom = sample_geometry(cfg, seed=0)
    cs = sample_channel_set(geom, assign_pilots(cfg), cfg, seed=0)
    with pytest.raises(ValueError):
        sample_channel_set(geom, assign_pilots(cfg), cfg, seed=0).__class__(
            h_hat=cs.h_hat[:, :-1],
            rho=cs.rho,
            rho_hat=cs.rho_hat,
            rho_tilde=cs.rho_tilde,
            antennas_per_ap=cs.antennas_per_ap,
        )
