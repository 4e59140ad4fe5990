"""Selectors: argmax correctness against Monte Carlo oracles, tie-breaking,
hallucination invariants, and the greedy variance-maximizing design."""

import math

import numpy as np
import pytest

from parbo.acquisition import (
    AcquisitionStrategy,
    expected_improvement,
    hallucinate,
    select_ei,
    select_random,
    select_ts,
    select_ucb,
    uncertainty_init,
)
from parbo.gp import Dataset, Kernel, condition

import oracles


def _fixture_posterior(seed=0, n=6, d=1, noise=0.1):
    rng = np.random.default_rng(seed)
    k = Kernel("se", np.full(d, 0.25), 1.0)
    X = rng.random((n, d))
    y = rng.standard_normal(n)
    return condition(k, Dataset(X, y), noise)


class TestStrategyConfig:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown strategy kind"):
            AcquisitionStrategy("epsilon-greedy")

    def test_unknown_param_rejected(self):
        with pytest.raises(ValueError, match="does not accept"):
            AcquisitionStrategy("ts", {"temperature": 2.0})

    def test_ucb_coefficient_accepted(self):
        s = AcquisitionStrategy("ucb", {"ucb_coefficient": 0.4})
        assert s.ucb_coefficient() == 0.4


class TestSelectTs:
    def test_singleton(self):
        post = _fixture_posterior()
        cand = np.array([[0.3]])
        assert select_ts(post, cand, np.random.default_rng(0))[0] == 0.3

    def test_dominant_candidate_nearly_always_wins(self):
        # one candidate's mean sits 10 units above the rest with sd <= 1
        k = Kernel("se", np.array([0.05]), 1.0)
        X = np.array([[0.1], [0.5], [0.9]])
        post = condition(k, Dataset(X, np.array([10.0, 0.0, 0.0])), 1e-4)
        cand = X
        rng = np.random.default_rng(1)
        wins = sum(
            np.array_equal(select_ts(post, cand, rng), X[0]) for _ in range(10_000)
        )
        assert wins >= 9990

    def test_selection_matches_argmax_law(self):
        # reduced-size version of the sampling-law acceptance criterion
        post = _fixture_posterior(seed=2, n=8)
        cand = np.linspace(0.05, 0.95, 5)[:, None]
        rng = np.random.default_rng(3)
        picks = np.zeros(5)
        n_sel = 20_000
        for _ in range(n_sel):
            idx = int(np.where(np.all(cand == select_ts(post, cand, rng), axis=1))[0][0])
            picks[idx] += 1
        mu, cov = post.joint(cand)
        L = np.linalg.cholesky(cov + 1e-12 * np.eye(5))
        draws = mu[None, :] + rng.standard_normal((200_000, 5)) @ L.T
        want = np.bincount(np.argmax(draws, axis=1), minlength=5) / 200_000
        tv = 0.5 * np.abs(picks / n_sel - want).sum()
        assert tv < 0.04


class TestSelectUcb:
    def test_pure_exploration_prefers_larger_sd(self):
        # means equal, second candidate twice the sd: far from the data wins
        k = Kernel("se", np.array([0.15]), 1.0)
        post = condition(k, Dataset(np.array([[0.0]]), np.array([0.0])), 0.5)
        cand = np.array([[0.05], [0.95]])
        pick = select_ucb(post, cand, step=1, dim=1)
        assert pick[0] == 0.95

    def test_matches_direct_formula(self):
        post = _fixture_posterior(seed=4, n=5, d=2)
        cand = np.random.default_rng(5).random((3, 2))
        j, d = 12, 2
        mu, var = post.mean_variance(cand)
        score = mu + math.sqrt(0.2 * d * math.log(2 * j + 1)) * np.sqrt(var)
        want = cand[int(np.argmax(score))]
        assert np.array_equal(select_ucb(post, cand, j, d), want)

    def test_equal_variances_reduce_to_mean_argmax(self):
        k = Kernel("se", np.array([0.2]), 1.0)
        post = condition(k, Dataset(np.zeros((0, 1)), np.zeros(0)), 0.1, mean_const=0.0)
        cand = np.array([[0.2], [0.8]])  # prior: equal variance, equal mean -> index 0
        assert np.array_equal(select_ucb(post, cand, 3, 1), cand[0])

    def test_step_must_be_positive(self):
        post = _fixture_posterior()
        with pytest.raises(ValueError, match="step"):
            select_ucb(post, np.array([[0.5]]), 0, 1)


class TestSelectEi:
    def test_zero_sd_improvement(self):
        assert expected_improvement([2.0], [0.0], 1.0)[0] == 1.0
        assert expected_improvement([0.5], [0.0], 1.0)[0] == 0.0

    def test_value_at_incumbent_mean(self):
        got = expected_improvement([1.0], [1.0], 1.0)[0]
        assert got == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-12)

    def test_matches_monte_carlo_oracle(self):
        post = _fixture_posterior(seed=6, n=7)
        cand = np.linspace(0.02, 0.98, 10)[:, None]
        best_y = float(np.max(post.data.values))
        mu, var = post.mean_variance(cand)
        rng = np.random.default_rng(7)
        samples = mu[None, :] + np.sqrt(var)[None, :] * rng.standard_normal((100_000, 10))
        mc_ei = np.maximum(samples - best_y, 0.0).mean(axis=0)
        want = cand[int(np.argmax(mc_ei))]
        assert np.array_equal(select_ei(post, cand, best_y), want)

    def test_closed_form_matches_quadrature(self):
        mu, sd, best = 0.3, 0.7, 0.5
        z = np.linspace(-12, 12, 200_001)
        pdf = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        want = np.trapezoid(np.maximum(mu + sd * z - best, 0.0) * pdf, z)
        assert expected_improvement([mu], [sd], best)[0] == pytest.approx(want, rel=1e-6)


class TestHallucinate:
    def test_empty_in_flight_is_identity(self):
        post = _fixture_posterior(seed=8)
        out = hallucinate(post, np.zeros((0, 1)))
        xs = np.random.default_rng(9).random((20, 1))
        np.testing.assert_allclose(out.mean(xs), post.mean(xs), atol=1e-10)
        np.testing.assert_allclose(out.variance(xs), post.variance(xs), atol=1e-10)

    def test_mean_preserved_variance_shrinks(self):
        post = _fixture_posterior(seed=10)
        x0 = np.array([[0.42]])
        out = hallucinate(post, x0)
        xs = np.random.default_rng(11).random((20, 1))
        np.testing.assert_allclose(out.mean(xs), post.mean(xs), atol=1e-8)
        assert out.variance(x0)[0] < post.variance(x0)[0]
        assert np.all(out.variance(xs) <= post.variance(xs) + 1e-10)

    def test_repeated_hallucination_monotone(self):
        post = _fixture_posterior(seed=12, noise=0.3)
        x0 = np.array([[0.6]])
        once = hallucinate(post, x0)
        twice = hallucinate(once, x0)
        v0, v1, v2 = (p.variance(x0)[0] for p in (post, once, twice))
        assert v0 > v1 > v2

    def test_matches_conditioning_oracle(self):
        post = _fixture_posterior(seed=13, n=4)
        x0 = np.array([[0.3]])
        out = hallucinate(post, x0)
        X = np.vstack([post.data.points, x0])
        y = np.concatenate([post.data.values, [post.mean(np.array([0.3]))]])
        xs = np.random.default_rng(14).random((10, 1))
        want_mu, want_var = oracles.posterior_mean_var(
            "se", post.kernel.bandwidths, post.kernel.scale, X, y, post.noise_var,
            post.mean_const, xs,
        )
        np.testing.assert_allclose(out.mean(xs), want_mu, rtol=1e-8)
        np.testing.assert_allclose(out.variance(xs), want_var, rtol=1e-7, atol=1e-10)


class TestUncertaintyInit:
    def test_stationary_first_pick_is_index_zero(self):
        k = Kernel("se", np.array([0.2]), 1.0)
        cand = np.linspace(0, 1, 11)[:, None]
        out = uncertainty_init(k, cand, 1)
        assert np.array_equal(out[0], cand[0])

    def test_second_point_far_from_first(self):
        k = Kernel("se", np.array([0.1]), 1.0)
        cand = np.linspace(0, 1, 101)[:, None]
        out = uncertainty_init(k, cand, 2)
        assert abs(out[1, 0] - out[0, 0]) > 0.5

    def test_matches_bruteforce_oracle(self):
        k = Kernel("se", np.array([0.15]), 1.0)
        cand = np.linspace(0, 1, 21)[:, None]
        got = uncertainty_init(k, cand, 5, noise_var=0.05)
        chosen = []
        for _ in range(5):
            if chosen:
                _, var = oracles.posterior_mean_var(
                    "se", k.bandwidths, k.scale, np.asarray(chosen),
                    np.zeros(len(chosen)), 0.05, 0.0, cand,
                )
            else:
                var = np.full(len(cand), k.scale)
            chosen.append(cand[int(np.argmax(var))])
        np.testing.assert_allclose(got, np.asarray(chosen), atol=1e-12)

    def test_output_ignores_observations_by_construction(self):
        # the design method takes no observed values at all; two calls agree
        k = Kernel("matern52", np.array([0.2, 0.2]), 1.0)
        cand = np.random.default_rng(15).random((40, 2))
        a = uncertainty_init(k, cand, 6)
        b = uncertainty_init(k, cand, 6)
        assert np.array_equal(a, b)

    def test_too_many_points_rejected(self):
        k = Kernel("se", np.array([0.2]), 1.0)
        with pytest.raises(ValueError, match="exceeds"):
            uncertainty_init(k, np.zeros((3, 1)), 4)


class TestSelectRandom:
    def test_singleton(self):
        assert select_random(np.array([[0.7]]), np.random.default_rng(0))[0] == 0.7

    def test_uniform_frequencies(self):
        cand = np.arange(10)[:, None] / 10.0
        rng = np.random.default_rng(16)
        counts = np.zeros(10)
        for _ in range(100_000):
            counts[int(select_random(cand, rng)[0] * 10)] += 1
        assert np.all(np.abs(counts / 100_000 - 0.1) < 0.01)

    def test_seeded_reproducibility(self):
        cand = np.random.default_rng(17).random((25, 3))
        a = [select_random(cand, np.random.default_rng(5))[0] for _ in range(1)]
        b = [select_random(cand, np.random.default_rng(5))[0] for _ in range(1)]
        assert a == b

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            select_random(np.zeros((0, 2)), np.random.default_rng(0))
