"""Channel-model unit tests."""

import numpy as np
import pytest

from nsin_urllc.channels import (
    elevation_angle,
    friis_amplitude,
    hap_uav_los_angle,
    make_bs_hap_channel,
    sample_hap_uav_channel,
    sample_utg_channels,
    steering_vector,
    steering_vector_derivative,
)
from nsin_urllc.config import default_array_config, default_scenario


@pytest.fixture
def scenario():
    return default_scenario()


@pytest.fixture
def arrays():
    return default_array_config()


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        assert np.allclose(steering_vector(0.0, 4, 0.5), np.ones(4))

    def test_endfire_alternates_sign(self):
        a = steering_vector(np.pi / 2 - 1e-9, 2, 0.5)
        assert np.allclose(a, [1, -1], atol=1e-6)

    def test_matches_per_element_evaluation(self):
        a = steering_vector(0.3, 8, 0.5)
        direct = [np.exp(-2j * np.pi * n * 0.5 * np.sin(0.3)) for n in range(8)]
        assert np.allclose(a, direct, atol=1e-14)

    def test_unit_modulus_and_norm(self):
        a = steering_vector(0.7, 33, 0.5)
        assert np.allclose(np.abs(a), 1.0)
        assert np.isclose(np.linalg.norm(a) ** 2, 33)

    def test_derivative_matches_finite_difference(self):
        h = 1e-7
        fd = (steering_vector(0.3 + h, 16) - steering_vector(0.3 - h, 16)) / (2 * h)
        assert np.allclose(steering_vector_derivative(0.3, 16), fd, atol=1e-5)


class TestBsHapChannel:
    def test_friis_amplitude_zero_excess(self):
        lam = 0.05
        assert np.isclose(friis_amplitude(1000.0, lam), lam / (4 * np.pi * 1000))

    def test_gain_magnitude_is_friis(self, scenario, arrays):
        ch = make_bs_hap_channel(scenario, arrays)
        d = np.linalg.norm(scenario.hap_position)
        expected = friis_amplitude(d, arrays.wavelength, scenario.excess_loss_bs_hap_db)
        assert np.isclose(abs(ch.gain), expected)

    def test_rank_one(self, scenario, arrays):
        ch = make_bs_hap_channel(scenario, arrays)
        s = np.linalg.svd(ch.matrix, compute_uv=False)
        assert s[1] < 1e-12 * s[0]
        assert np.isclose(s[0], abs(ch.gain) * np.sqrt(arrays.num_bs_antennas * arrays.num_ris_elements))

    def test_outer_product_structure(self, scenario, arrays):
        ch = make_bs_hap_channel(scenario, arrays)
        a_ris = steering_vector(ch.aoa, arrays.num_ris_elements, arrays.ris_spacing)
        a_bs = steering_vector(ch.aod, arrays.num_bs_antennas, arrays.bs_spacing)
        assert np.allclose(ch.matrix, ch.gain * np.outer(a_ris, a_bs.conj()))

    def test_degenerate_geometry_rejected(self, arrays):
        with pytest.raises(ValueError):
            make_bs_hap_channel(default_scenario(hap_position=[0.0, 0.0, 0.0]), arrays)

    def test_elevation_angle_basic(self):
        assert np.isclose(elevation_angle(np.zeros(3), np.array([1.0, 0, 1.0])), np.pi / 4)


class TestHapUavChannel:
    def test_dense_channel_matches_path_sum(self, scenario, arrays):
        inst = sample_hap_uav_channel(scenario, arrays, np.random.default_rng(0))
        h = sum(
            beta * steering_vector(omega, arrays.num_ris_elements, arrays.ris_spacing)
            for beta, omega in zip(inst.path_gains, inst.path_aods)
        )
        assert np.linalg.norm(h - inst.dense_channel) < 1e-12 * np.linalg.norm(h)

    def test_aods_within_spread(self, scenario, arrays):
        los = hap_uav_los_angle(scenario)
        for seed in range(20):
            inst = sample_hap_uav_channel(scenario, arrays, np.random.default_rng(seed))
            assert np.all(np.abs(inst.path_aods - los) <= scenario.angular_spread / 2 + 1e-12)

    def test_path_count(self, scenario, arrays):
        inst = sample_hap_uav_channel(scenario, arrays, np.random.default_rng(1), num_paths=3)
        assert inst.num_paths == 3

    def test_energy_independent_of_num_paths(self, scenario, arrays):
        rng = np.random.default_rng(2)
        energies = {}
        for L in (2, 16):
            vals = [
                np.linalg.norm(sample_hap_uav_channel(scenario, arrays, rng, num_paths=L).path_gains) ** 2
                for _ in range(2000)
            ]
            energies[L] = np.mean(vals)
        assert np.isclose(energies[2], energies[16], rtol=0.1)


class TestUtgChannels:
    def test_snr_definition(self, scenario):
        ch = sample_utg_channels(scenario, np.random.default_rng(0))[0]
        p = 0.3
        expected = p * abs(ch.large_scale_gain * ch.small_scale_sample) ** 2 / scenario.noise_power_robot
        assert np.isclose(ch.snr(p, scenario.noise_power_robot), expected)

    def test_small_scale_unit_power(self, scenario):
        rng = np.random.default_rng(3)
        samples = [c.small_scale_sample for _ in range(10_000) for c in sample_utg_channels(scenario, rng)]
        assert np.isclose(np.mean(np.abs(samples) ** 2), 1.0, rtol=0.02)

    def test_snr_exponential_cdf(self, scenario):
        from scipy import stats

        rng = np.random.default_rng(4)
        ch0 = sample_utg_channels(scenario, np.random.default_rng(0))[0]
        mean = ch0.mean_snr_per_watt * scenario.uav_power_budget
        snrs = []
        for _ in range(10_000):
            c = sample_utg_channels(default_scenario(num_robots=1), rng)[0]
            # same large-scale link, fresh small-scale draw
            snrs.append(mean * abs(c.small_scale_sample) ** 2)
        snrs = np.asarray(snrs)
        # empirical CDF at the mean within 1% of 1 - 1/e
        emp = np.mean(snrs <= mean)
        assert abs(emp - (1 - np.exp(-1))) < 0.01
        # KS test against the exponential distribution at significance 0.01
        assert stats.kstest(snrs, "expon", args=(0, mean)).pvalue > 0.01
