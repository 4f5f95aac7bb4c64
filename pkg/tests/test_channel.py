import math

import numpy as np
import pytest

from uavfronthaul.antenna import ArrayConfig, get_evaluator
from uavfronthaul.channel import (BOLTZMANN, LIGHT_SPEED, LOS_ENVIRONMENTS,
                                  ChannelParams, VibrationModel,
                                  draw_vibration, los_probability, noise_power,
                                  path_loss, received_power)
from uavfronthaul.geometry import AnglePair

P = ChannelParams()


class TestPathLoss:
    def test_unit_distance(self):
        lam = P.wavelength
        assert path_loss(P, lam / (4.0 * math.pi)) == pytest.approx(1.0,
                                                                    rel=1e-12)

    def test_arithmetic_oracle(self):
        lam = LIGHT_SPEED / 95e9
        ref = (lam / (4.0 * math.pi * 100.0)) ** 2
        assert path_loss(P, 100.0) == pytest.approx(ref, rel=1e-12)

    def test_inverse_square(self):
        ratio = path_loss(P, 100.0) / path_loss(P, 200.0)
        assert 10.0 * math.log10(ratio) == pytest.approx(6.020599913, abs=1e-6)

    def test_absorption(self):
        p = ChannelParams(absorption_k=0.01)
        assert path_loss(p, 100.0) == pytest.approx(
            path_loss(P, 100.0) * math.exp(-1.0), rel=1e-12)

    def test_strictly_decreasing(self):
        ls = np.linspace(10.0, 1000.0, 100)
        vals = path_loss(P, ls)
        assert np.all(np.diff(vals) < 0)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            path_loss(P, 0.0)


class TestLosProbability:
    def test_ninety_degrees(self):
        ref = 1.0 / (1.0 + 9.61 * math.exp(-0.16 * (90.0 - 9.61)))
        assert los_probability(P, math.pi / 2) == pytest.approx(ref, rel=1e-12)
        assert los_probability(P, math.pi / 2) == pytest.approx(1.0, abs=1e-4)

    def test_exponent_zero_point(self):
        elev = math.radians(P.los_alpha)
        assert los_probability(P, elev) == pytest.approx(
            1.0 / (1.0 + P.los_alpha), rel=1e-12)

    def test_monotone(self):
        assert los_probability(P, math.radians(80)) > los_probability(
            P, math.radians(20))
        es = np.radians(np.linspace(0.0, 90.0, 91))
        assert np.all(np.diff(los_probability(P, es)) > 0)

    def test_environment_presets(self):
        assert set(LOS_ENVIRONMENTS) == {"suburban", "urban", "dense-urban",
                                         "highrise-urban"}
        assert LOS_ENVIRONMENTS["urban"] == (9.61, 0.16)


class TestNoisePower:
    def test_arithmetic_oracle(self):
        ref = BOLTZMANN * 293.15 * 3e9
        assert noise_power(P) == pytest.approx(ref, rel=1e-12)
        dbm = 10.0 * math.log10(noise_power(P) * 1000.0)
        assert dbm == pytest.approx(-79.2, abs=0.1)

    def test_noise_figure(self):
        p = ChannelParams(noise_figure_db=3.0)
        assert noise_power(p) / noise_power(P) == pytest.approx(10 ** 0.3,
                                                                rel=1e-12)

    def test_bandwidth_linearity(self):
        p = ChannelParams(bandwidth=30e9)
        ratio_db = 10.0 * math.log10(noise_power(p) / noise_power(P))
        assert ratio_db == pytest.approx(10.0, abs=1e-9)


class TestVibration:
    def test_zero_sigma(self):
        v = VibrationModel(0.0, 0.0)
        rng = np.random.default_rng(0)
        d = draw_vibration(v, rng)
        assert d.theta_x == 0.0 and d.theta_y == 0.0

    def test_statistics(self):
        v = VibrationModel.from_degrees(1.0)
        rng = np.random.default_rng(123)
        z = draw_vibration(v, rng, n=1_000_000)
        std = float(np.std(z[0]))
        assert std == pytest.approx(math.radians(1.0), rel=0.005)
        assert abs(float(np.mean(z[0]))) < 3.0 * std / 1000.0
        corr = float(np.corrcoef(z[0], z[1])[0, 1])
        assert abs(corr) < 0.01

    def test_determinism(self):
        v = VibrationModel.from_degrees(1.0, 1.4)
        a = draw_vibration(v, np.random.default_rng(7), n=100)
        b = draw_vibration(v, np.random.default_rng(7), n=100)
        assert np.array_equal(a, b)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            VibrationModel(-0.1, 0.1)


class TestReceivedPower:
    def test_zero_vibration_is_boresight_product(self):
        uav = get_evaluator(ArrayConfig(15))
        sbs = get_evaluator(ArrayConfig(15))
        got = received_power(P, 120.0, uav, sbs, AnglePair(0.0, 0.0))
        ref = P.p_t * path_loss(P, 120.0) * uav.peak * sbs.peak
        assert got == pytest.approx(ref, rel=1e-12)

    def test_one_degree_composition_oracle(self):
        uav = get_evaluator(ArrayConfig(15))
        sbs = get_evaluator(ArrayConfig(15))
        d = AnglePair(math.radians(1.0), 0.0)
        got = received_power(P, 120.0, uav, sbs, d)
        ref = (P.p_t * path_loss(P, 120.0) * sbs.peak * uav.peak
               * float(uav.normalized_gain(math.radians(1.0), 0.0)))
        assert got == pytest.approx(ref, rel=1e-9)

    def test_bounded_by_ideal(self):
        uav = get_evaluator(ArrayConfig(15))
        sbs = get_evaluator(ArrayConfig(15))
        ideal = received_power(P, 120.0, uav, sbs, AnglePair(0.0, 0.0))
        rng = np.random.default_rng(5)
        for _ in range(100):
            d = AnglePair(*rng.normal(0.0, math.radians(1.5), 2))
            assert received_power(P, 120.0, uav, sbs, d) <= ideal + 1e-15

    def test_larger_array_higher_peak(self):
        sbs = get_evaluator(ArrayConfig(15))
        lo = received_power(P, 120.0, get_evaluator(ArrayConfig(5)), sbs,
                            AnglePair(0.0, 0.0))
        hi = received_power(P, 120.0, get_evaluator(ArrayConfig(25)), sbs,
                            AnglePair(0.0, 0.0))
        assert hi > lo


class TestParamsValidation:
    def test_negative_power(self):
        with pytest.raises(ValueError):
            ChannelParams(p_t=-1.0)

    def test_negative_absorption(self):
        with pytest.raises(ValueError):
            ChannelParams(absorption_k=-0.1)
