from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmfading import infodensity as idn
from gmfading.capacity import InputCovariance, phi_mc
from gmfading.channel import ChannelParams, apply_channel, sample_gain_matrices, sample_gain_sequence, transmit
from gmfading.errors import DimensionMismatch, InvalidParams
from gmfading.linalg import complex_normal

from oracles import DENSITY_SISO_T1_Z1

SISO = ChannelParams(1, 1, 1.0, 1.0, 0.0)


def test_symbol_examples():
    q = np.eye(1)
    assert idn.info_density_symbol([1], [1], [[1]], q, 1.0) == pytest.approx(DENSITY_SISO_T1_Z1, abs=1e-12)
    assert idn.info_density_symbol([0], [0], [[1]], q, 1.0) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_zero_gain_gives_zero(seed):
    rng = np.random.default_rng(seed)
    t, z = complex_normal(rng, 2), complex_normal(rng, 3)
    assert idn.info_density_symbol(t, z, np.zeros((3, 2)), np.eye(2), 0.7) == pytest.approx(0.0, abs=1e-12)


def test_symbol_matches_log_likelihood_ratio():
    # log2 p(z | t, g) / p(z | g) written out with Gaussian densities
    rng = np.random.default_rng(1)
    g, t, z = complex_normal(rng, (2, 2)), complex_normal(rng, 2), complex_normal(rng, 2)
    q, s2 = np.diag([0.7, 0.3]), 0.5
    cov_out = g @ q @ g.conj().T + s2 * np.eye(2)
    r = z - g @ t
    ln_cond = -np.vdot(r, r).real / s2 - 2 * np.log(np.pi * s2)
    ln_marg = -np.vdot(z, np.linalg.solve(cov_out, z)).real - np.log(np.linalg.det(np.pi * cov_out).real)
    expected = (ln_cond - ln_marg) / np.log(2)
    assert idn.info_density_symbol(t, z, g, q, s2) == pytest.approx(expected, abs=1e-10)


def test_batch_matches_symbol():
    rng = np.random.default_rng(2)
    G, T, Z = complex_normal(rng, (20, 3, 2)), complex_normal(rng, (20, 2)), complex_normal(rng, (20, 3))
    q = np.array([[1.0, 0.2j], [-0.2j, 0.5]])
    batch = idn.info_density_batch(T, Z, G, q, 0.9)
    single = [idn.info_density_symbol(T[k], Z[k], G[k], q, 0.9) for k in range(20)]
    np.testing.assert_allclose(batch, single, atol=1e-10)


def test_sequence_edge_cases():
    rng = np.random.default_rng(3)
    seq = sample_gain_sequence(SISO, 1, rng)
    t = complex_normal(rng, (1, 1))
    z = transmit(seq, t, 1.0, rng)
    assert idn.info_density_sequence(t, z, seq, np.eye(1), 1.0) == pytest.approx(
        idn.info_density_symbol(t[0], z[0], seq.gains[0], np.eye(1), 1.0))
    zero = np.zeros((5, 1, 1))
    assert idn.info_density_sequence(np.ones((5, 1)), np.ones((5, 1)), zero, np.eye(1), 1.0) == pytest.approx(0.0)


def test_dimension_errors():
    with pytest.raises(DimensionMismatch):
        idn.info_density_symbol([1, 2], [1], [[1]], np.eye(1), 1.0)
    with pytest.raises(DimensionMismatch):
        idn.info_density_sequence(np.ones((3, 1)), np.ones((2, 1)), np.ones((3, 1, 1)), np.eye(1), 1.0)
    with pytest.raises(InvalidParams):
        idn.info_density_symbol([1], [1], [[1]], np.eye(1), 0.0)


def test_per_symbol_mean_identity():
    p = ChannelParams(2, 2, 1.0, 2.0, 0.0)
    q = np.diag([1.5, 0.5])
    rng = np.random.default_rng(4)
    n = 100_000
    G = sample_gain_matrices(p, n, rng)
    T = idn.sample_inputs(q, (n,), rng)
    Z = apply_channel(G, T, p.sigma2, rng)
    x = idn.info_density_batch(T, Z, G, q, p.sigma2)
    phi = phi_mc(q, p, 100_000, 5)
    assert abs(x.mean() - phi.value) <= 3 * np.hypot(x.std() / np.sqrt(n), phi.stderr)


def test_block_mean_matches_phi():
    p = replace(SISO, alpha=0.5)
    x = idn.normalized_density_trials(p, np.eye(1), 64, 2000, 6)
    phi = phi_mc(np.eye(1), p, 100_000, 7)
    assert abs(x.mean() - phi.value) <= 3 * np.hypot(x.std(ddof=1) / np.sqrt(x.size), phi.stderr)


def test_variance_experiment_fields_and_mean():
    p = ChannelParams(2, 1, 1.0, 1.0, 0.3)
    q = InputCovariance.isotropic(p)
    s = idn.variance_experiment(p, q, 32, 1000, 8, phi_samples=50_000)
    assert s.n == 32 and s.trials == 1000 and s.alpha == 0.3
    assert s.kappa_fit == pytest.approx(s.var * 32)
    assert abs(s.mean_bits - s.phi_bits) <= 3 * np.hypot(s.mean_stderr, s.phi_stderr)


def test_variance_experiment_rejects_few_trials():
    with pytest.raises(InvalidParams):
        idn.variance_experiment(SISO, np.eye(1), 8, 50, 0)


def test_variance_halves_when_n_doubles():
    v64 = idn.variance_experiment(SISO, np.eye(1), 64, 2000, 9, phi_samples=1000).var
    v128 = idn.variance_experiment(SISO, np.eye(1), 128, 2000, 10, phi_samples=1000).var
    assert 1.4 <= v64 / v128 <= 2.8


def test_alpha_does_not_move_the_mean():
    a = idn.variance_experiment(SISO, np.eye(1), 128, 2000, 11, phi_samples=1000)
    b = idn.variance_experiment(replace(SISO, alpha=0.9), np.eye(1), 128, 2000, 12, phi_samples=1000)
    assert abs(a.mean_bits - b.mean_bits) <= 3 * np.hypot(a.mean_stderr, b.mean_stderr)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9])
def test_variance_bound_shape(alpha):
    p = replace(SISO, alpha=alpha)
    kappa = [idn.variance_experiment(p, np.eye(1), n, 2000, 20 + n, phi_samples=1000).kappa_fit
             for n in (64, 128, 256, 512)]
    assert max(kappa) <= 1.5 * kappa[0]


def test_lag_covariance_alpha_zero():
    covs = idn.correlation_decay_experiment(SISO, np.eye(1), [0, 1, 2, 3], 50_000, 13)
    assert covs[0].cov > 0
    for c in covs[1:]:
        assert abs(c.cov) <= 3 * c.stderr
        assert c.bound_shape == 0.0


def test_lag_zero_is_logdet_variance():
    p = replace(SISO, alpha=0.5)
    covs = idn.correlation_decay_experiment(p, np.eye(1), [0], 20_000, 14)
    assert covs[0].cov > 0


def test_lag_covariance_decays():
    p = replace(SISO, alpha=0.81)
    covs = idn.correlation_decay_experiment(p, np.eye(1), range(7), 100_000, 15)
    ratio = idn.fit_decay_ratio(covs)
    assert abs(ratio - 0.9) <= 0.25 * 0.9
    mags = [abs(c.cov) for c in covs]
    assert all(a > b for a, b in zip(mags, mags[1:4]))
    assert covs[1].fit_cprime > 0


def test_lag_validation():
    with pytest.raises(InvalidParams):
        idn.correlation_decay_experiment(SISO, np.eye(1), [], 100, 0)
    with pytest.raises(InvalidParams):
        idn.correlation_decay_experiment(SISO, np.eye(1), [-1], 100, 0)
