"""Synthetic objectives on the unit cube, maximization convention.

Every benchmark is evaluated on [0, 1]^d; functions with other natural
domains are mapped in by a per-coordinate affine transform, and classical
minimization benchmarks are negated so that *larger is better* throughout.
Noisy queries add centred Gaussian noise with the benchmark's standard
deviation. High-dimensional variants tile a base function over disjoint
coordinate blocks and add the results up.

Base formulas and their natural domains:

* ``branin`` (d=2, natural domain [-5, 10] x [0, 15], negated):
  (x2 - 5.1 x1^2 / (4 pi^2) + 5 x1 / pi - 6)^2
  + 10 (1 - 1/(8 pi)) cos(x1) + 10.
* ``currinexp`` (d=2, natural domain [0, 1]^2):
  (1 - exp(-1/(2 x2))) (2300 x1^3 + 1900 x1^2 + 2092 x1 + 60)
  / (100 x1^3 + 500 x1^2 + 4 x1 + 20); the bracket tends to 1 as x2 -> 0.
* ``hartmann3`` / ``hartmann6`` (natural domain [0, 1]^d, negated):
  -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2) with the standard
  (A, P, alpha) tables.
* ``park1`` (d=4, natural domain [0, 1]^4):
  (sqrt(x1^2 + (x2 + x3^2) x4) - x1) / 2 + (x1 + 3 x4) exp(1 + sin x3);
  the first term is the algebraic form of
  x1/2 (sqrt(1 + (x2 + x3^2) x4 / x1^2) - 1), finite at x1 = 0.
* ``park2`` (d=4, natural domain [0, 1]^4):
  (2/3) exp(x1 + x2) - x4 sin(x3) + x3.

Recorded optima come from a one-time million-point quasi-random sweep with
local refinement; ``park1``/``park2`` peak at cube corners where the exact
values are closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class Benchmark:
    """A deterministic objective plus its noise level and known optimum."""

    name: str
    dim: int
    noise_sd: float
    opt_value: float
    opt_point: np.ndarray
    _fn: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        object.__setattr__(
            self, "opt_point", np.asarray(self.opt_point, dtype=float).reshape(-1)
        )

    def _batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"{self.name} expects points of shape (n, {self.dim})")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError(f"{self.name} is defined on the unit cube only")
        return self._fn(X)

    def eval_clean(self, x) -> float:
        """Noise-free value at a single point in [0, 1]^d."""
        x = np.asarray(x, dtype=float).reshape(-1)
        return float(self._batch(x[None, :])[0])

    def eval_noisy(self, x, rng: np.random.Generator) -> float:
        return self.observe(x, rng)[1]

    def observe(self, x, rng: np.random.Generator) -> tuple[float, float]:
        """(clean, noisy) pair; the noisy value adds N(0, noise_sd^2)."""
        clean = self.eval_clean(x)
        if self.noise_sd == 0.0:
            return clean, clean
        return clean, clean + self.noise_sd * float(rng.standard_normal())

    def with_noise(self, noise_sd: float) -> "Benchmark":
        if noise_sd < 0.0:
            raise ValueError("noise_sd must be nonnegative")
        return replace(self, noise_sd=float(noise_sd))


def _branin(X):
    x1 = -5.0 + 15.0 * X[:, 0]
    x2 = 15.0 * X[:, 1]
    b = 5.1 / (4.0 * np.pi**2)
    c = 5.0 / np.pi
    t = 1.0 / (8.0 * np.pi)
    val = (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0
    return -val


def _currin(X):
    x1, x2 = X[:, 0], X[:, 1]
    with np.errstate(divide="ignore"):
        decay = np.where(x2 > 0.0, np.exp(-1.0 / (2.0 * np.maximum(x2, 1e-300))), 0.0)
    num = 2300.0 * x1**3 + 1900.0 * x1**2 + 2092.0 * x1 + 60.0
    den = 100.0 * x1**3 + 500.0 * x1**2 + 4.0 * x1 + 20.0
    return (1.0 - decay) * num / den


_H_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H3_A = np.array(
    [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]]
)
_H3_P = 1e-4 * np.array(
    [
        [3689.0, 1170.0, 2673.0],
        [4699.0, 4387.0, 7470.0],
        [1091.0, 8732.0, 5547.0],
        [381.0, 5743.0, 8828.0],
    ]
)
_H6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)


def _hartmann(X, A, P):
    inner = np.einsum("ij,nij->ni", A, (X[:, None, :] - P[None, :, :]) ** 2)
    return np.exp(-inner) @ _H_ALPHA


def _hartmann3(X):
    return _hartmann(X, _H3_A, _H3_P)


def _hartmann6(X):
    return _hartmann(X, _H6_A, _H6_P)


def _park1(X):
    x1, x2, x3, x4 = X.T
    hump = 0.5 * (np.sqrt(x1**2 + (x2 + x3**2) * x4) - x1)
    return hump + (x1 + 3.0 * x4) * np.exp(1.0 + np.sin(x3))


def _park2(X):
    x1, x2, x3, x4 = X.T
    return (2.0 / 3.0) * np.exp(x1 + x2) - x4 * np.sin(x3) + x3


def _tiled(fn, block: int, reps: int):
    def tiled(X):
        total = np.zeros(X.shape[0])
        for r in range(reps):
            total += fn(X[:, r * block : (r + 1) * block])
        return total

    return tiled


# Exact corner optima for the Park functions.
_PARK1_OPT = 0.5 * (math.sqrt(3.0) - 1.0) + 4.0 * math.exp(1.0 + math.sin(1.0))
_PARK2_OPT = 2.0 * math.e**2 / 3.0 + 1.0

_BASE = [
    Benchmark(
        "branin",
        2,
        0.2,
        -0.39788735772973816,
        [(math.pi + 5.0) / 15.0, 2.275 / 15.0],
        _branin,
    ),
    Benchmark(
        "currinexp",
        2,
        0.2,
        13.798722044728432,
        [0.2166666622812287, 0.0],
        _currin,
    ),
    Benchmark(
        "hartmann3",
        3,
        0.2,
        3.8627797873326557,
        [0.11458888006665931, 0.5556488942127591, 0.8525469760623422],
        _hartmann3,
    ),
    Benchmark("park1", 4, 0.2, _PARK1_OPT, [1.0, 1.0, 1.0, 1.0], _park1),
    Benchmark("park2", 4, 0.2, _PARK2_OPT, [1.0, 1.0, 1.0, 0.0], _park2),
    Benchmark(
        "hartmann6",
        6,
        0.2,
        3.32236801141312,
        [
            0.2016896194403791,
            0.150010560321593,
            0.47687367217860516,
            0.2753322388664027,
            0.3116516097274788,
            0.6573005582075655,
        ],
        _hartmann6,
    ),
]


def _compose(name, base: Benchmark, reps: int, noise_sd: float) -> Benchmark:
    return Benchmark(
        name,
        base.dim * reps,
        noise_sd,
        base.opt_value * reps,
        np.tile(base.opt_point, reps),
        _tiled(base._fn, base.dim, reps),
    )


def _build_registry() -> dict[str, Benchmark]:
    reg = {b.name: b for b in _BASE}
    reg["hartmann12"] = _compose("hartmann12", reg["hartmann6"], 2, 1.0)
    reg["park2-16"] = _compose("park2-16", reg["park2"], 4, 1.0)
    reg["currinexp-14"] = _compose("currinexp-14", reg["currinexp"], 7, 1.0)
    reg["hartmann18"] = _compose("hartmann18", reg["hartmann6"], 3, 1.0)
    return reg


_REGISTRY = _build_registry()


def names() -> list[str]:
    return list(_REGISTRY)


def get(name: str) -> Benchmark:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown benchmark {name!r}; available: {', '.join(_REGISTRY)}"
        ) from None


def constant(dim: int = 1, value: float = 0.0, noise_sd: float = 0.0) -> Benchmark:
    """A flat objective, handy when only the scheduling dynamics matter."""
    return Benchmark(
        f"constant{dim}d",
        dim,
        noise_sd,
        value,
        np.zeros(dim),
        lambda X: np.full(X.shape[0], value),
    )


def sweep_extremes(
    benchmark: Benchmark, n: int = 1_000_000, seed: int = 0
) -> tuple[float, float]:
    """(min, max) clean values over a quasi-random sweep of the cube."""
    eng = qmc.Halton(benchmark.dim, scramble=True, seed=seed)
    chunk = 100_000
    lo, hi = math.inf, -math.inf
    remaining = n
    while remaining > 0:
        vals = benchmark._batch(eng.random(min(chunk, remaining)))
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
        remaining -= chunk
    return lo, hi


_WORST_DEV_CACHE: dict[tuple[str, int, int], float] = {}


def worst_deviation(benchmark: Benchmark, n: int = 1_000_000, seed: int = 0) -> float:
    """Largest gap between the optimum and any value, estimated by sweep.

    This is the regret assigned at times before any evaluation completes.
    Cached per (benchmark, sweep size, seed) since the sweep is pure.
    """
    key = (benchmark.name, n, seed)
    if key not in _WORST_DEV_CACHE:
        lo, _ = sweep_extremes(benchmark, n, seed)
        _WORST_DEV_CACHE[key] = benchmark.opt_value - lo
    return _WORST_DEV_CACHE[key]
