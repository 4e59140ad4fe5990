"""Calculators and Monte Carlo validators for parallel-throughput theory.

Covers the expected maximum of M i.i.d. evaluation times (exact for
uniform and exponential, bounds plus Monte Carlo for half-normal and
Pareto), the spacing representation of exponential order statistics,
prediction intervals for the number of evaluations N(T) under each
scheduling mode, information-gain quantities of a GP observed through
Gaussian noise, and the confidence-width schedule used by UCB-style
analyses.

Conventions: the exponential distribution is parameterised by its *rate*,
so the mean duration is ``1/rate`` and the expected maximum of M draws is
``harmonic(M)/rate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .benchmarks import constant
from .gp import Dataset, Kernel, _chol_with_jitter, condition
from .scheduler import ASYNCHRONOUS, MODES, SEQUENTIAL, SYNCHRONOUS, run_simulation
from .times import Exponential, HalfNormal, TimeDistribution, Uniform

_MC_CHUNK = 200_000


def harmonic(m: int) -> float:
    """M-th harmonic number, sum of 1/i for i = 1..M."""
    if m < 1:
        raise ValueError("harmonic number needs m >= 1")
    return float(np.sum(1.0 / np.arange(1, m + 1)))


def max_samples(
    dist: TimeDistribution, m: int, rng: np.random.Generator, trials: int
) -> np.ndarray:
    """Monte Carlo draws of max(X_1..X_m), chunked to bound memory."""
    if trials < 1:
        raise ValueError("trials must be positive")
    out = np.empty(trials)
    done = 0
    rows = max(1, _MC_CHUNK // m)
    while done < trials:
        k = min(rows, trials - done)
        out[done : done + k] = dist.sample(rng, (k, m)).max(axis=1)
        done += k
    return out


@dataclass(frozen=True)
class MaxStats:
    """Expected duration of one job and of the max over m parallel jobs.

    ``exact`` is set when a closed form exists (uniform, exponential, and
    trivially m = 1); otherwise ``mc_estimate`` carries a Monte Carlo
    value and, for the half-normal, ``upper_bound`` the analytic cap
    zeta * sqrt(2 log 2m).
    """

    dist: TimeDistribution
    m: int
    expected_single: float
    exact: float | None = None
    mc_estimate: float | None = None
    upper_bound: float | None = None

    @property
    def value(self) -> float:
        if self.exact is not None:
            return self.exact
        if self.mc_estimate is not None:
            return self.mc_estimate
        raise ValueError("no point value available for this distribution")


def expected_max(
    dist: TimeDistribution,
    m: int,
    rng: np.random.Generator | None = None,
    trials: int = 200_000,
) -> MaxStats:
    """Expected maximum of m i.i.d. durations.

    Uniform(a,b): (a + b m)/(m + 1). Exponential(rate): harmonic(m)/rate.
    Half-normal and Pareto have no closed form here; they need ``rng`` for
    a Monte Carlo estimate (the half-normal also reports its analytic
    upper bound).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    single = dist.mean()
    if isinstance(dist, Uniform):
        return MaxStats(dist, m, single, exact=(dist.a + dist.b * m) / (m + 1))
    if isinstance(dist, Exponential):
        return MaxStats(dist, m, single, exact=harmonic(m) / dist.rate)
    if m == 1:
        return MaxStats(dist, m, single, exact=single)
    upper = dist.zeta * math.sqrt(2.0 * math.log(2.0 * m)) if isinstance(dist, HalfNormal) else None
    if rng is None:
        return MaxStats(dist, m, single, upper_bound=upper)
    est = float(max_samples(dist, m, rng, trials).mean())
    return MaxStats(dist, m, single, mc_estimate=est, upper_bound=upper)


def renyi_order_statistics(
    m: int, rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Order statistics of m i.i.d. Exponential(rate) draws, descending,
    generated from independent scaled spacings: the i-th largest equals
    sum_{k=i}^{m} E_k / k."""
    if m < 1:
        raise ValueError("m must be >= 1")
    spacings = Exponential(rate).sample(rng, m) / np.arange(1, m + 1)
    return np.cumsum(spacings[::-1])[::-1]


def renyi_max_samples(
    m: int, rate: float, rng: np.random.Generator, trials: int
) -> np.ndarray:
    """Monte Carlo draws of the maximum via the spacing representation."""
    weights = 1.0 / np.arange(1, m + 1)
    out = np.empty(trials)
    done = 0
    rows = max(1, _MC_CHUNK // m)
    while done < trials:
        k = min(rows, trials - done)
        out[done : done + k] = Exponential(rate).sample(rng, (k, m)) @ weights
        done += k
    return out


@dataclass(frozen=True)
class NBoundInterval:
    """Open interval that should contain N(T) with high probability once T
    is large enough relative to alpha."""

    mode: str
    lower: float
    upper: float
    alpha: float

    def contains(self, n: int) -> bool:
        return self.lower < n < self.upper


def n_bounds(
    dist: TimeDistribution,
    mode: str,
    m: int,
    horizon: float,
    alpha: float,
    theta_max: float | None = None,
) -> NBoundInterval:
    """Prediction interval for the number of completed evaluations.

    Sequential: (T/(theta(1+a)) - 1, T/(theta(1-a))) with theta the mean
    duration. Asynchronous: both ends scale by m. Synchronous: theta is
    replaced by the expected maximum over m (exact for uniform and
    exponential; pass ``theta_max`` from a Monte Carlo estimate
    otherwise).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    theta = dist.mean()
    if mode == SEQUENTIAL:
        return NBoundInterval(
            mode, horizon / (theta * (1 + alpha)) - 1, horizon / (theta * (1 - alpha)), alpha
        )
    if mode == ASYNCHRONOUS:
        return NBoundInterval(
            mode,
            m * (horizon / (theta * (1 + alpha)) - 1),
            m * horizon / (theta * (1 - alpha)),
            alpha,
        )
    if theta_max is None:
        stats = expected_max(dist, m)
        if stats.exact is None:
            raise ValueError(
                f"{dist.family} has no exact expected maximum; estimate theta_max "
                "by Monte Carlo (expected_max with an rng) and pass it in"
            )
        theta_max = stats.exact
    return NBoundInterval(
        mode,
        m * (horizon / (theta_max * (1 + alpha)) - 1),
        m * horizon / (theta_max * (1 - alpha)),
        alpha,
    )


def validate_concentration(
    dist: TimeDistribution,
    mode: str,
    m: int,
    horizon: float,
    alpha: float,
    runs: int,
    rng: np.random.Generator,
    theta_max: float | None = None,
) -> float:
    """Fraction of simulated runs whose N(T) lands inside n_bounds.

    Uses random selection with zero-cost model updates so only the
    scheduling dynamics matter. Coverage approaches 1 as the horizon
    grows; small horizons may legitimately under-cover.
    """
    if runs < 100:
        raise ValueError("need at least 100 runs for a meaningful coverage estimate")
    if mode == SYNCHRONOUS and theta_max is None:
        stats = expected_max(dist, m, rng=rng)
        theta_max = stats.exact if stats.exact is not None else stats.mc_estimate
    interval = n_bounds(dist, mode, m, horizon, alpha, theta_max)
    objective = constant(dim=1)
    hits = 0
    for _ in range(runs):
        trace = run_simulation(
            mode,
            m,
            horizon,
            "random",
            objective,
            dist,
            rng=rng,
            init_count=0,
            refit_period=None,
            candidate_count=1,
        )
        hits += interval.contains(len(trace.records))
    return hits / runs


def exp_max_tail_check(
    rate: float,
    m: int,
    thresholds,
    rng: np.random.Generator,
    trials: int = 1_000_000,
) -> list[dict]:
    """Empirical upper-tail frequencies of max(X_1..X_m) - E[max] against
    the sub-exponential Chernoff bound 2 exp(-t^2 rate^2 / 8), valid for
    t <= 2/rate."""
    expected = harmonic(m) / rate
    samples = max_samples(Exponential(rate), m, rng, trials)
    out = []
    for t in thresholds:
        empirical = float(np.mean(samples - expected >= t))
        bound = 2.0 * math.exp(-(t**2) * rate**2 / 8.0)
        out.append(
            {"t": float(t), "empirical": empirical, "bound": bound, "pass": empirical <= bound}
        )
    return out


# -- information gain ----------------------------------------------------


def info_gain(kernel: Kernel, points, noise_var: float) -> float:
    """Mutual information between f and noisy observations at ``points``:
    0.5 * log det(I + K / noise_var)."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return 0.0
    if points.ndim == 1:
        points = points[:, None]
    if noise_var <= 0.0:
        raise ValueError("noise_var must be positive")
    K = kernel.pairwise(points, points)
    mat = np.eye(points.shape[0]) + K / noise_var
    L, _ = _chol_with_jitter(mat, 1.0)
    return float(np.sum(np.log(np.diag(L))))


def greedy_mig(
    kernel: Kernel, candidates, n: int, noise_var: float
) -> tuple[np.ndarray, float]:
    """Greedy surrogate for the maximum information gain over n points.

    Returns the greedily chosen subset and its achieved gain; marginal
    gains are non-increasing by submodularity, and the result lower-bounds
    the true combinatorial maximum.
    """
    candidates = np.asarray(candidates, dtype=float)
    if candidates.ndim == 1:
        candidates = candidates[:, None]
    if n > candidates.shape[0]:
        raise ValueError("cannot select more points than candidates")
    chosen: list[int] = []
    current = 0.0
    for _ in range(n):
        gains = np.full(candidates.shape[0], -np.inf)
        for i in range(candidates.shape[0]):
            if i in chosen:
                continue
            subset = candidates[chosen + [i]]
            gains[i] = info_gain(kernel, subset, noise_var) - current
        pick = int(np.argmax(gains))
        chosen.append(pick)
        current += float(gains[pick])
    return candidates[chosen], current


def beta_n(n: int, d: int, a: float, b: float) -> float:
    """Confidence-width schedule 4(d+1) log n + 2d log(d a b sqrt(pi))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if d <= 0 or a <= 0.0 or b <= 0.0:
        raise ValueError("d, a, b must be positive")
    return 4.0 * (d + 1) * math.log(n) + 2.0 * d * math.log(d * a * b * math.sqrt(math.pi))


def variance_sum_check(
    kernel: Kernel, point_sequence, noise_var: float, tol: float = 1e-8
) -> tuple[float, float, bool]:
    """Check sum_j var_{j-1}(x_j) <= 2/log(1 + 1/noise_var) * achieved gain.

    The right side uses the information actually gained by the sequence,
    which is at most the maximum information gain, so the inequality is
    checked in its strongest form. Requires kernel.scale <= 1 (the
    normalization the bound is stated under).
    """
    points = np.asarray(point_sequence, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise ValueError("point sequence must be non-empty")
    if kernel.scale > 1.0 + 1e-12:
        raise ValueError("variance-sum bound requires kernel scale <= 1")
    lhs = 0.0
    for j in range(points.shape[0]):
        prefix = points[:j]
        post = condition(
            kernel, Dataset(prefix, np.zeros(j)), noise_var
        )  # variance never looks at the values
        lhs += float(post.variance(points[j]))
    rhs = 2.0 / math.log1p(1.0 / noise_var) * info_gain(kernel, points, noise_var)
    return lhs, rhs, lhs <= rhs + tol


def stdmi_ratio_check(
    kernel: Kernel, set_a, set_b, noise_var: float, xs, tol: float = 1e-8
) -> tuple[float, float, bool]:
    """Check sd_A(x) / sd_{A u B}(x) <= exp(I(f; y_B | y_A)) at the given
    query points. Returns (largest ratio, bound, holds)."""
    A = np.asarray(set_a, dtype=float)
    B = np.asarray(set_b, dtype=float)
    xs = np.asarray(xs, dtype=float)
    post_a = condition(kernel, Dataset(A, np.zeros(A.shape[0])), noise_var)
    post_ab = condition(
        kernel, Dataset(np.vstack([A, B]), np.zeros(A.shape[0] + B.shape[0])), noise_var
    )
    sd_a = np.sqrt(post_a.variance(xs))
    sd_ab = np.sqrt(post_ab.variance(xs))
    ratio = float(np.max(sd_a / np.maximum(sd_ab, 1e-300)))
    bound = math.exp(conditional_info_gain(kernel, A, B, noise_var))
    return ratio, bound, ratio <= bound + tol


def conditional_info_gain(kernel: Kernel, set_a, set_b, noise_var: float) -> float:
    """I(f; y_B | y_A) via the chain rule: gain(A u B) - gain(A)."""
    A = np.asarray(set_a, dtype=float)
    B = np.asarray(set_b, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if B.size == 0:
        return 0.0
    if A.size:
        for row in B:
            if np.any(np.all(np.isclose(A, row, atol=1e-12), axis=1)):
                raise ValueError("conditioning sets must be disjoint")
        both = np.vstack([A, B])
    else:
        both = B
    return info_gain(kernel, both, noise_var) - info_gain(kernel, A, noise_var)
