import math

import numpy as np
import pytest

from vlcmux.channel import dc_photocurrent, subcarrier_channel
from vlcmux.geometry import UeState
from vlcmux.link import (
    ClippingStats,
    NoiseModel,
    SnrGrid,
    achievable_rate,
    clipping_stats,
    db_to_linear,
    identity_multiplexers,
    receiver_noise,
    snr_grid,
    svd_multiplexers,
    uniform_power_allocation,
)
from vlcmux.strategies import empirical_sd

from conftest import make_params

NO_CLIPPING = ClippingStats(math.inf, -math.inf, 1.0, 0.0, 0.0)


def mc_clipping_oracle(kappa, n=4_000_000, seed=99):
    """Monte Carlo Bussgang oracle: E{x clip(x)} and Var(clip(x) - eta x)."""
    x = np.random.default_rng(seed).standard_normal(n)
    clipped = np.clip(x, -kappa, kappa)
    eta = float(np.mean(x * clipped))
    return eta, float(np.var(clipped - eta * x))


class TestClippingStats:
    def test_reference_attenuation(self):
        assert clipping_stats(3.2).attenuation == pytest.approx(0.99863, abs=1e-5)

    @pytest.mark.parametrize("kappa", [1.0, 3.2])
    def test_against_monte_carlo(self, kappa):
        eta_mc, var_mc = mc_clipping_oracle(kappa)
        stats = clipping_stats(kappa)
        assert stats.attenuation == pytest.approx(eta_mc, abs=3e-3)
        assert stats.noise_var == pytest.approx(var_mc, abs=3e-3)

    def test_no_clipping_limit(self):
        stats = clipping_stats(40.0)
        assert stats.attenuation == pytest.approx(1.0, abs=1e-12)
        assert stats.noise_var == pytest.approx(0.0, abs=1e-12)
        assert stats.mean_clipped == 0.0

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            clipping_stats(0.0)


class TestReceiverNoise:
    MODEL = NoiseModel(50.0, 300.0, 50e6)

    def test_thermal_floor(self):
        # 4 * 1.38e-23 * 300 * 5e7 / 50
        assert receiver_noise(0.0, self.MODEL) == pytest.approx(1.656e-14, rel=1e-12)

    def test_linear_in_bandwidth(self):
        double = NoiseModel(50.0, 300.0, 100e6)
        assert receiver_noise(1e-3, double) == pytest.approx(
            2.0 * receiver_noise(1e-3, self.MODEL), rel=1e-12)

    def test_shot_noise_increment(self):
        shot = receiver_noise(1e-3, self.MODEL) - receiver_noise(0.0, self.MODEL)
        assert shot == pytest.approx(1.6e-14, rel=1e-12)

    def test_negative_photocurrent_rejected(self):
        with pytest.raises(ValueError):
            receiver_noise(-1e-6, self.MODEL)
        with pytest.raises(ValueError):
            NoiseModel(0.0, 300.0, 50e6)


class TestSvdMultiplexers:
    def test_real_diagonal_channel(self):
        h = np.array([np.diag([3.0, 1.0])], dtype=complex)
        mux = svd_multiplexers(h, 2)
        assert np.allclose(mux.singular_values[0], [3.0, 1.0])
        a = mux.detectors[0] @ h[0] @ mux.precoders[0]
        assert np.allclose(np.abs(a), np.diag([3.0, 1.0]), atol=1e-12)

    def test_random_channels_diagonalised(self, rng):
        h = rng.normal(size=(16, 4, 4)) + 1j * rng.normal(size=(16, 4, 4))
        mux = svd_multiplexers(h, 4)
        for k in range(16):
            a = mux.detectors[k] @ h[k] @ mux.precoders[k]
            err = np.linalg.norm(a - np.diag(mux.singular_values[k]))
            assert err <= 1e-10 * np.linalg.norm(h[k])
            f = mux.precoders[k]
            assert np.allclose(f.conj().T @ f, np.eye(4), atol=1e-10)
            assert np.allclose(np.linalg.norm(mux.detectors[k], axis=1), 1.0, atol=1e-10)
            assert np.all(np.diff(mux.singular_values[k]) <= 0)

    def test_rank_one_channel(self, rng):
        u = rng.normal(size=3) + 1j * rng.normal(size=3)
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        h = np.array([np.outer(u, v)])
        mux = svd_multiplexers(h, 3)
        s = mux.singular_values[0]
        assert s[1] <= 1e-12 * s[0] and s[2] <= 1e-12 * s[0]

    def test_nonfinite_rejected(self):
        h = np.full((1, 2, 2), np.nan, dtype=complex)
        with pytest.raises(ValueError):
            svd_multiplexers(h, 2)
        with pytest.raises(ValueError):
            svd_multiplexers(np.zeros((1, 2, 2), complex), 3)


class TestSnrGrid:
    def test_scalar_channel_reference(self):
        h = np.array([np.diag([2.0, 0.5])], dtype=complex)
        mux = identity_multiplexers(h, 2)
        noise = np.array([1e-2, 4e-2])
        q = uniform_power_allocation(256)
        grid = snr_grid(h, mux, NO_CLIPPING, noise, q)
        assert grid.gamma[0, 0] == pytest.approx(4.0 * q / 1e-2, rel=1e-12)
        assert grid.gamma[1, 0] == pytest.approx(0.25 * q / 4e-2, rel=1e-12)

    def test_zero_channel_zero_snr(self):
        h = np.zeros((3, 2, 2), dtype=complex)
        grid = snr_grid(h, identity_multiplexers(h, 2), clipping_stats(3.2),
                        np.array([1e-3, 1e-3]), 1.0)
        assert np.all(grid.gamma == 0.0)

    def test_crosstalk_case_matches_term_by_term_loop(self):
        h = np.array([[[1.0 + 0.2j, 0.3 - 0.1j], [0.15 + 0.05j, 0.8 - 0.3j]]])
        clip = clipping_stats(3.2)
        noise = np.array([2e-2, 3e-2])
        q = uniform_power_allocation(256)
        grid = snr_grid(h, identity_multiplexers(h, 2), clip, noise, q)
        eta, s2 = clip.attenuation, clip.noise_var
        w = np.eye(2)
        f = np.eye(2)
        for i in range(2):
            signal = eta ** 2 * abs(sum(w[i, nr] * h[0, nr, nt] * f[nt, i]
                                        for nr in range(2) for nt in range(2))) ** 2 * q
            clip_term = s2 * sum(abs(w[i, nr] * h[0, nr, nt]) ** 2
                                 for nr in range(2) for nt in range(2))
            interference = eta ** 2 * sum(
                abs(sum(w[i, nr] * h[0, nr, nt] * f[nt, j]
                        for nr in range(2) for nt in range(2))) ** 2 * q
                for j in range(2) if j != i)
            rx = sum(abs(w[i, nr]) ** 2 * noise[nr] for nr in range(2))
            expected = signal / (clip_term + interference + rx)
            assert grid.gamma[i, 0] == pytest.approx(expected, rel=1e-12)

    def test_all_zero_noise_rejected(self):
        h = np.ones((1, 2, 2), dtype=complex)
        with pytest.raises(ValueError):
            snr_grid(h, identity_multiplexers(h, 2), NO_CLIPPING,
                     np.zeros(2), 1.0)

    def test_svd_interference_negligible(self, rng):
        h = rng.normal(size=(8, 3, 3)) + 1j * rng.normal(size=(8, 3, 3))
        mux = svd_multiplexers(h, 3)
        a = mux.detectors @ h @ mux.precoders
        a_pow = np.abs(a) ** 2
        diag = np.einsum("kii->ki", a_pow)
        off = a_pow * (1.0 - np.eye(3))
        assert np.all(off.sum(axis=2) <= 1e-18 * diag)


class TestAchievableRate:
    def test_zero_snr_zero_rate(self):
        grid = SnrGrid(np.zeros((2, 127)), 1.0)
        assert achievable_rate(grid, 4.0, 1e-8, 256, 30) == 0.0

    def test_closed_form_127_bits(self):
        gap = db_to_linear(6.06)
        grid = SnrGrid(np.full((1, 127), gap), uniform_power_allocation(256))
        rate = achievable_rate(grid, gap, 1e-8, 256, 30)
        assert rate == pytest.approx(127.0 / (1e-8 * 286.0), rel=1e-9)
        assert rate == pytest.approx(44.406e6, rel=1e-4)

    def test_gap_conversion(self):
        assert db_to_linear(6.06) == pytest.approx(10 ** 0.606, rel=1e-12)
        assert db_to_linear(6.06) == pytest.approx(4.036, abs=5e-4)

    def test_stream_permutation_invariant(self, rng):
        gamma = rng.uniform(0.0, 100.0, (4, 127))
        base = achievable_rate(SnrGrid(gamma, 1.0), 4.0, 1e-8, 256, 30)
        shuffled = achievable_rate(SnrGrid(gamma[[2, 0, 3, 1]], 1.0), 4.0, 1e-8, 256, 30)
        assert base == pytest.approx(shuffled, rel=1e-14)

    def test_gap_below_one_rejected(self):
        with pytest.raises(ValueError):
            achievable_rate(SnrGrid(np.ones((1, 1)), 1.0), 0.5, 1e-8, 256, 30)

    def test_uniform_allocation_value(self):
        assert uniform_power_allocation(256) == 256 / 254


class TestSnrPowerMonotonicity:
    def test_scaling_power_never_decreases_snr(self, rng):
        params = make_params()
        q = uniform_power_allocation(256)
        clip = clipping_stats(params.clipping_level)
        for trial in range(20):
            n = int(rng.integers(1, 4))
            ue = UeState(rng.uniform(0, 5), rng.uniform(0, 5), 1.0,
                         1.0 - math.pi / 2, 0.0, 0.0)
            gammas = []
            for s in (1.0, 2.0, 4.0):
                scene = empirical_sd(n, make_params(total_power=80.0 * s))
                h = subcarrier_channel(scene, ue).data_subcarriers()
                mux = svd_multiplexers(h, n)
                noise = np.array([receiver_noise(float(i), scene.noise)
                                  for i in dc_photocurrent(scene, ue)])
                gammas.append(snr_grid(h, mux, clip, noise, q).gamma)
            assert np.all(gammas[1] >= gammas[0] * (1 - 1e-9))
            assert np.all(gammas[2] >= gammas[1] * (1 - 1e-9))
