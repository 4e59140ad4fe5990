"""Gaussian-process regression on the unit cube.

Stationary kernels (squared exponential, Matern 5/2) with per-dimension
bandwidths, exact posterior conditioning through a Cholesky factor of the
noisy Gram matrix, joint sampling over finite candidate sets, log marginal
likelihood, and a seeded random-search hyperparameter fit.

Conventions: inputs live in ``[0, 1]^d``, observation noise is i.i.d.
Gaussian with variance ``noise_var``, and the prior mean is a constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

SQUARED_EXPONENTIAL = "se"
MATERN52 = "matern52"
KERNEL_FAMILIES = (SQUARED_EXPONENTIAL, MATERN52)

# Diagonal bumps tried when a Gram/covariance factorization fails outright.
# The first attempt is always unjittered so that well-conditioned systems
# are solved exactly.
_JITTER_START = 1e-10
_JITTER_MAX = 1e-4
_JITTER_GROWTH = 10.0

# Posterior variances at or below this fraction of the kernel scale are
# treated as numerically zero when drawing joint samples: such coordinates
# are pinned to the mean instead of being given jitter-sized wiggle.
_VARIANCE_FLOOR = 1e-9


class FactorizationError(RuntimeError):
    """Raised when a Gram matrix stays non-positive-definite after the
    full jitter escalation, i.e. it is numerically singular."""


@dataclass(frozen=True)
class Kernel:
    """Stationary covariance function with per-dimension bandwidths.

    ``k(x, x) == scale`` for every x, and ``k`` is symmetric in its
    arguments. Regret-bound calculators additionally require
    ``scale <= 1``; they enforce that at their own call sites.
    """

    family: str
    bandwidths: np.ndarray
    scale: float

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        bw = np.atleast_1d(np.asarray(self.bandwidths, dtype=float))
        if bw.ndim != 1 or bw.size == 0:
            raise ValueError("bandwidths must be a non-empty 1-d array")
        if np.any(bw <= 0.0):
            raise ValueError("bandwidths must be positive")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dim(self) -> int:
        return self.bandwidths.size

    def pairwise(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """Covariance matrix between row-stacked point sets X (n,d), Z (m,d)."""
        U = _as_points(X, self.dim) / self.bandwidths
        V = _as_points(Z, self.dim) / self.bandwidths
        # |u-v|^2 via one gemm; cancellation can leave tiny negatives
        r2 = np.maximum(
            np.einsum("nk,nk->n", U, U)[:, None]
            + np.einsum("mk,mk->m", V, V)[None, :]
            - 2.0 * (U @ V.T),
            0.0,
        )
        if self.family == SQUARED_EXPONENTIAL:
            return self.scale * np.exp(-0.5 * r2)
        r = np.sqrt(r2)
        s5r = np.sqrt(5.0) * r
        return self.scale * (1.0 + s5r + (5.0 / 3.0) * r2) * np.exp(-s5r)


def kernel_eval(kernel: Kernel, x, xp) -> float:
    """Evaluate k(x, x') for two single points."""
    x = np.asarray(x, dtype=float).reshape(-1)
    xp = np.asarray(xp, dtype=float).reshape(-1)
    if x.size != kernel.dim or xp.size != kernel.dim:
        raise ValueError(
            f"dimension mismatch: kernel is {kernel.dim}-d, "
            f"got points of size {x.size} and {xp.size}"
        )
    return float(kernel.pairwise(x[None, :], xp[None, :])[0, 0])


@dataclass(frozen=True)
class Dataset:
    """Observed (points, values) pairs with points inside the unit cube."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (n, d)")
        if pts.shape[0] != vals.size:
            raise ValueError(
                f"length mismatch: {pts.shape[0]} points vs {vals.size} values"
            )
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("points must lie in the unit cube [0, 1]^d")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


def _as_points(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError(f"expected points of shape (m, {dim}), got {X.shape}")
    return X


def _chol_with_jitter(mat: np.ndarray, scale: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``mat``, escalating a diagonal jitter
    from 1e-10*scale up to 1e-4*scale when the plain factorization fails."""
    n = mat.shape[0]
    eye = np.eye(n)
    jitter = 0.0
    while True:
        try:
            return np.linalg.cholesky(mat + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if jitter == 0.0:
                jitter = _JITTER_START * scale
            else:
                jitter *= _JITTER_GROWTH
            if jitter > _JITTER_MAX * scale * (1.0 + 1e-12):
                raise FactorizationError(
                    f"Gram matrix of size {n} is numerically singular "
                    f"(jitter escalated past {_JITTER_MAX * scale:g})"
                ) from None


@dataclass(frozen=True)
class GpPosterior:
    """Immutable GP conditioned on a finite dataset.

    Holds the lower Cholesky factor of ``K + noise_var*I`` (plus any
    jitter that was required) so that mean/variance/joint queries are
    triangular solves. Safe to share across concurrent readers.
    """

    kernel: Kernel
    data: Dataset
    noise_var: float
    mean_const: float
    chol: np.ndarray | None
    _alpha: np.ndarray | None

    @property
    def n(self) -> int:
        return len(self.data)

    def _cross(self, X: np.ndarray) -> np.ndarray:
        return self.kernel.pairwise(self.data.points, X)  # (n, m)

    def mean(self, X) -> np.ndarray | float:
        """Posterior mean at one point (scalar) or a batch (1-d array)."""
        single = np.asarray(X).ndim == 1
        X = _as_points(X, self.kernel.dim)
        if self.n == 0:
            out = np.full(X.shape[0], self.mean_const)
        else:
            out = self.mean_const + self._cross(X).T @ self._alpha
        return float(out[0]) if single else out

    def variance(self, X) -> np.ndarray | float:
        """Posterior variance, clamped at zero after numerical jitter."""
        single = np.asarray(X).ndim == 1
        X = _as_points(X, self.kernel.dim)
        if self.n == 0:
            out = np.full(X.shape[0], self.kernel.scale)
        else:
            v = solve_triangular(self.chol, self._cross(X), lower=True)
            out = np.maximum(self.kernel.scale - np.einsum("nm,nm->m", v, v), 0.0)
        return float(out[0]) if single else out

    def mean_variance(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = _as_points(X, self.kernel.dim)
        if self.n == 0:
            return (
                np.full(X.shape[0], self.mean_const),
                np.full(X.shape[0], self.kernel.scale),
            )
        k = self._cross(X)
        v = solve_triangular(self.chol, k, lower=True)
        mu = self.mean_const + k.T @ self._alpha
        var = np.maximum(self.kernel.scale - np.einsum("nm,nm->m", v, v), 0.0)
        return mu, var

    def joint(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean vector and cross-covariance matrix over a batch."""
        X = _as_points(X, self.kernel.dim)
        prior = self.kernel.pairwise(X, X)
        if self.n == 0:
            return np.full(X.shape[0], self.mean_const), prior
        k = self._cross(X)
        v = solve_triangular(self.chol, k, lower=True)
        mu = self.mean_const + k.T @ self._alpha
        return mu, prior - v.T @ v


def condition(
    kernel: Kernel, data: Dataset, noise_var: float, mean_const: float = 0.0
) -> GpPosterior:
    """Condition a GP prior on observations.

    ``noise_var`` may be zero, in which case the jitter ladder supplies
    the regularization. Raises :class:`FactorizationError` if the noisy
    Gram matrix cannot be factorized.
    """
    if noise_var < 0.0:
        raise ValueError("noise_var must be nonnegative")
    if len(data) == 0:
        return GpPosterior(kernel, data, float(noise_var), float(mean_const), None, None)
    K = kernel.pairwise(data.points, data.points)
    K[np.diag_indices_from(K)] += noise_var
    L, _ = _chol_with_jitter(K, kernel.scale)
    resid = data.values - mean_const
    alpha = solve_triangular(
        L, solve_triangular(L, resid, lower=True), lower=True, trans="T"
    )
    return GpPosterior(kernel, data, float(noise_var), float(mean_const), L, alpha)


def sample_joint(
    post: GpPosterior, candidates, rng: np.random.Generator, draws: int | None = None
) -> np.ndarray:
    """Draw from the joint posterior over a finite candidate set.

    Returns a single draw of shape (m,) by default, or (draws, m) sharing
    one covariance factorization. Candidates whose posterior variance is
    below a small fraction of the kernel scale are pinned exactly to the
    posterior mean (a degenerate Gaussian coordinate).
    """
    X = _as_points(candidates, post.kernel.dim)
    if X.shape[0] == 0:
        raise ValueError("candidate set must be non-empty")
    mu, cov = post.joint(X)
    floor = _VARIANCE_FLOOR * post.kernel.scale
    active = np.diag(cov) > floor
    k = 1 if draws is None else int(draws)
    out = np.tile(mu, (k, 1))
    if active.any():
        sub = cov[np.ix_(active, active)]
        L, _ = _chol_with_jitter(sub, post.kernel.scale)
        z = rng.standard_normal((k, int(active.sum())))
        out[:, active] += z @ L.T
    return out[0] if draws is None else out


def log_marginal_likelihood(
    kernel: Kernel, data: Dataset, noise_var: float, mean_const: float = 0.0
) -> float:
    """GP evidence: -1/2 z'(K+s2 I)^-1 z - 1/2 log det(K+s2 I) - n/2 log 2pi."""
    n = len(data)
    if n == 0:
        raise ValueError("log marginal likelihood requires a non-empty dataset")
    K = kernel.pairwise(data.points, data.points)
    K[np.diag_indices_from(K)] += noise_var
    L, _ = _chol_with_jitter(K, kernel.scale)
    z = data.values - mean_const
    w = solve_triangular(L, z, lower=True)
    return float(
        -0.5 * w @ w - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2.0 * np.pi)
    )


# Random-search ranges for the hyperparameter fit (log-uniform draws).
_BANDWIDTH_RANGE = (0.01, 2.0)
_SCALE_LO = 0.1
_NOISE_REL_RANGE = (1e-4, 1.0)
_VAR_FLOOR = 1e-8  # sample variance floor so constant data stays searchable


def _log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    if hi <= lo:
        return lo if size is None else np.full(size, lo)
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


def fit_hyperparams(
    data: Dataset,
    family: str,
    budget: int,
    rng: np.random.Generator,
    noise_known: float | None = None,
) -> tuple[Kernel, float, float]:
    """Random-search maximum-likelihood fit of (bandwidths, scale, noise).

    The constant mean is the median of the observed values. ``budget``
    log-uniform candidates are scored by the log marginal likelihood and
    the best one wins; the search is deterministic for a fixed rng state.
    """
    if budget < 1:
        raise ValueError("fit budget must be at least 1")
    if len(data) < 2:
        raise ValueError("hyperparameter fit needs at least 2 observations")
    d = data.points.shape[1]
    mean_const = float(np.median(data.values))
    s2 = max(float(np.var(data.values)), _VAR_FLOOR)

    # Per-dimension squared differences, reused across all candidates.
    diff = data.points[:, None, :] - data.points[None, :, :]
    sq = diff * diff

    n = len(data)
    eye = np.eye(n)
    z = data.values - mean_const
    best = (-np.inf, None, None)
    for _ in range(budget):
        bw = _log_uniform(rng, *_BANDWIDTH_RANGE, size=d)
        scale = float(_log_uniform(rng, _SCALE_LO, max(10.0 * s2, _SCALE_LO)))
        nv = (
            float(noise_known)
            if noise_known is not None
            else float(
                _log_uniform(rng, _NOISE_REL_RANGE[0] * s2, _NOISE_REL_RANGE[1] * s2)
            )
        )
        r2 = np.einsum("nmk,k->nm", sq, 1.0 / bw**2)
        if family == SQUARED_EXPONENTIAL:
            K = scale * np.exp(-0.5 * r2)
        else:
            r = np.sqrt(np.maximum(r2, 0.0))
            s5r = np.sqrt(5.0) * r
            K = scale * (1.0 + s5r + (5.0 / 3.0) * r2) * np.exp(-s5r)
        try:
            L, _ = _chol_with_jitter(K + nv * eye, scale)
        except FactorizationError:
            continue
        w = solve_triangular(L, z, lower=True)
        lml = -0.5 * w @ w - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2 * np.pi)
        if lml > best[0]:
            best = (lml, Kernel(family, bw, scale), nv)
    if best[1] is None:
        raise FactorizationError("no hyperparameter candidate was factorizable")
    return best[1], best[2], mean_const
