"""Duration distributions: sampling moments, means, unit-mean rescaling."""

import math

import numpy as np
import pytest

from parbo.times import Exponential, HalfNormal, Pareto, Uniform, from_config, sample_time


class TestSampling:
    def test_exponential_mean(self):
        rng = np.random.default_rng(0)
        x = Exponential(2.0).sample(rng, 1_000_000)
        assert abs(x.mean() - 0.5) < 0.01 * 0.5

    def test_uniform_mean(self):
        rng = np.random.default_rng(1)
        x = Uniform(1.0, 3.0).sample(rng, 1_000_000)
        assert abs(x.mean() - 2.0) < 0.01 * 2.0

    def test_halfnormal_mean(self):
        rng = np.random.default_rng(2)
        x = HalfNormal(1.0).sample(rng, 1_000_000)
        want = math.sqrt(2 / math.pi)
        assert abs(x.mean() - want) < 0.01 * want

    def test_pareto_mean_and_support(self):
        rng = np.random.default_rng(3)
        dist = Pareto(3.0, 0.5)
        x = dist.sample(rng, 1_000_000)
        assert x.min() >= 0.5
        assert abs(x.mean() - dist.mean()) < 0.02 * dist.mean()

    def test_samples_positive(self):
        rng = np.random.default_rng(4)
        for dist in (Uniform(0.5, 1.5), HalfNormal(2.0), Exponential(1.0), Pareto(2.0, 1.0)):
            assert np.all(dist.sample(rng, 10_000) > 0)
            assert sample_time(dist, rng) > 0


class TestValidation:
    def test_uniform_needs_ordered_bounds(self):
        with pytest.raises(ValueError):
            Uniform(2.0, 1.0)
        with pytest.raises(ValueError):
            Uniform(-1.0, 1.0)

    def test_positive_params(self):
        with pytest.raises(ValueError):
            HalfNormal(0.0)
        with pytest.raises(ValueError):
            Exponential(-1.0)
        with pytest.raises(ValueError):
            Pareto(0.0, 1.0)


class TestUnitMean:
    @pytest.mark.parametrize(
        "dist",
        [Uniform(0.5, 2.5), HalfNormal(4.0), Exponential(0.25), Pareto(3.0, 2.0)],
    )
    def test_normalization_is_exact(self, dist):
        assert dist.unit_mean().mean() == pytest.approx(1.0, rel=1e-12)

    def test_heavy_tail_without_mean_rejected(self):
        with pytest.raises(ValueError, match="mean"):
            Pareto(0.8, 1.0).unit_mean()

    def test_scaling_scales_samples(self):
        dist = Exponential(2.0)
        a = dist.sample(np.random.default_rng(7), 100)
        b = dist.scaled(3.0).sample(np.random.default_rng(7), 100)
        np.testing.assert_allclose(b, 3.0 * a, rtol=1e-12)


class TestConfigRoundTrip:
    @pytest.mark.parametrize(
        "dist",
        [Uniform(0.5, 2.5), HalfNormal(4.0), Exponential(0.25), Pareto(3.0, 2.0)],
    )
    def test_round_trip(self, dist):
        assert from_config(dist.to_config()) == dist

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown time distribution"):
            from_config({"family": "weibull", "k": 1.0})

    def test_missing_param(self):
        with pytest.raises(ValueError, match="missing"):
            from_config({"family": "uniform", "a": 0.0})

    def test_extra_param(self):
        with pytest.raises(ValueError, match="unknown params"):
            from_config({"family": "exponential", "rate": 1.0, "mean": 1.0})
