"""Point-selection rules over finite candidate sets.

All selectors take an explicit candidate array and break argmax ties by
lowest index, so every decision is deterministic given (posterior,
candidates, seed). Thompson sampling draws one joint posterior sample and
maximizes it; the hallucinated variants first shrink the posterior around
points other workers are still evaluating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .gp import Dataset, GpPosterior, Kernel, condition, sample_joint

STRATEGY_KINDS = ("ts", "hts", "ucb", "hucb", "ei", "random")
_STRATEGY_PARAMS: dict[str, frozenset[str]] = {
    "ts": frozenset(),
    "hts": frozenset(),
    "ucb": frozenset({"ucb_coefficient"}),
    "hucb": frozenset({"ucb_coefficient"}),
    "ei": frozenset(),
    "random": frozenset(),
}
DEFAULT_UCB_COEFFICIENT = 0.2


@dataclass(frozen=True)
class AcquisitionStrategy:
    """A selection rule plus its named numeric parameters.

    Unknown parameters for a given kind are rejected here so that config
    mistakes surface at parse time rather than mid-run.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(
                f"unknown strategy kind {self.kind!r}; expected one of {STRATEGY_KINDS}"
            )
        allowed = _STRATEGY_PARAMS[self.kind]
        extra = set(self.params) - allowed
        if extra:
            raise ValueError(
                f"strategy {self.kind!r} does not accept params {sorted(extra)}"
            )
        object.__setattr__(self, "params", dict(self.params))

    @property
    def uses_model(self) -> bool:
        return self.kind != "random"

    @property
    def hallucinates(self) -> bool:
        return self.kind in ("hts", "hucb")

    def ucb_coefficient(self) -> float:
        return float(self.params.get("ucb_coefficient", DEFAULT_UCB_COEFFICIENT))


def select_ts(post: GpPosterior, candidates, rng: np.random.Generator) -> np.ndarray:
    """Thompson sampling: argmax of one joint posterior draw."""
    candidates = np.asarray(candidates, dtype=float)
    g = sample_joint(post, candidates, rng)
    return candidates[int(np.argmax(g))]


def ucb_weight(step: int, dim: int, coefficient: float = DEFAULT_UCB_COEFFICIENT) -> float:
    """Exploration weight  coefficient * d * log(2j + 1)  at step j >= 1."""
    if step < 1:
        raise ValueError("step index must be >= 1")
    return coefficient * dim * np.log(2.0 * step + 1.0)


def select_ucb(
    post: GpPosterior,
    candidates,
    step: int,
    dim: int,
    coefficient: float = DEFAULT_UCB_COEFFICIENT,
) -> np.ndarray:
    """Upper confidence bound: argmax of mean + sqrt(weight) * sd."""
    candidates = np.asarray(candidates, dtype=float)
    mu, var = post.mean_variance(candidates)
    score = mu + np.sqrt(ucb_weight(step, dim, coefficient)) * np.sqrt(var)
    return candidates[int(np.argmax(score))]


def expected_improvement(mu, sd, best_y: float) -> np.ndarray:
    """Closed-form EI over the incumbent; max(mu - best, 0) where sd == 0."""
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    imp = mu - best_y
    out = np.maximum(imp, 0.0)
    pos = sd > 0.0
    if np.any(pos):
        z = imp[pos] / sd[pos]
        pdf = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
        out[pos] = imp[pos] * ndtr(z) + sd[pos] * pdf
    return out


def select_ei(post: GpPosterior, candidates, best_y: float) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=float)
    mu, var = post.mean_variance(candidates)
    ei = expected_improvement(mu, np.sqrt(var), best_y)
    return candidates[int(np.argmax(ei))]


def select_random(candidates, rng: np.random.Generator) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=float)
    if candidates.shape[0] == 0:
        raise ValueError("candidate set must be non-empty")
    return candidates[int(rng.integers(candidates.shape[0]))]


def hallucinate(post: GpPosterior, in_flight) -> GpPosterior:
    """Condition on fake observations (x, mean(x)) for in-flight points.

    Leaves the posterior mean unchanged everywhere and shrinks the
    variance around the in-flight points, which is the standard trick to
    make deterministic selectors spread a batch out.
    """
    in_flight = np.asarray(in_flight, dtype=float)
    if in_flight.size == 0:
        return post
    if in_flight.ndim == 1:
        in_flight = in_flight[None, :]
    fake_y = post.mean(in_flight)
    points = np.vstack([post.data.points, in_flight])
    values = np.concatenate([post.data.values, np.atleast_1d(fake_y)])
    return condition(post.kernel, Dataset(points, values), post.noise_var, post.mean_const)


def uncertainty_init(
    kernel: Kernel, candidates, n_init: int, noise_var: float = 0.0
) -> np.ndarray:
    """Greedy variance-maximizing initial design.

    The first point maximizes the prior variance (all candidates tie for
    a stationary kernel, so index 0 wins); each later point maximizes the
    posterior variance given the points already chosen. Observations
    never enter, so the whole sequence can be precomputed and deployed in
    parallel.
    """
    candidates = np.asarray(candidates, dtype=float)
    if candidates.ndim == 1:
        candidates = candidates[:, None]
    if n_init < 1:
        raise ValueError("n_init must be >= 1")
    if n_init > candidates.shape[0]:
        raise ValueError(
            f"n_init={n_init} exceeds the {candidates.shape[0]} available candidates"
        )
    chosen: list[np.ndarray] = []
    for _ in range(n_init):
        if not chosen:
            var = np.full(candidates.shape[0], kernel.scale)
        else:
            pts = np.asarray(chosen)
            post = condition(kernel, Dataset(pts, np.zeros(len(chosen))), noise_var)
            var = post.variance(candidates)
        chosen.append(candidates[int(np.argmax(var))])
    return np.asarray(chosen)
