"""Random evaluation-time models: uniform, half-normal, exponential, Pareto.

Each distribution samples strictly positive durations, knows its mean, and
can be rescaled so the expected time per evaluation is one time unit (the
normalization the experiment harness applies before simulating).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class TimeDistribution:
    """Base for duration models; subclasses are small frozen dataclasses."""

    family: str

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def scaled(self, factor: float) -> "TimeDistribution":
        """Distribution of factor * X."""
        raise NotImplementedError

    def unit_mean(self) -> "TimeDistribution":
        m = self.mean()
        if not math.isfinite(m) or m <= 0.0:
            raise ValueError(f"cannot normalize {self!r}: mean is {m}")
        return self.scaled(1.0 / m)

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(TimeDistribution):
    a: float
    b: float
    family = "uniform"

    def __post_init__(self):
        if not (0.0 <= self.a < self.b):
            raise ValueError("uniform durations need 0 <= a < b")

    def sample(self, rng, size=None):
        return self.a + (self.b - self.a) * rng.random(size)

    def mean(self):
        return 0.5 * (self.a + self.b)

    def scaled(self, factor):
        return Uniform(self.a * factor, self.b * factor)

    def to_config(self):
        return {"family": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class HalfNormal(TimeDistribution):
    zeta_sq: float
    family = "halfnormal"

    def __post_init__(self):
        if not self.zeta_sq > 0.0:
            raise ValueError("halfnormal durations need zeta_sq > 0")

    @property
    def zeta(self) -> float:
        return math.sqrt(self.zeta_sq)

    def sample(self, rng, size=None):
        return np.abs(self.zeta * rng.standard_normal(size))

    def mean(self):
        return self.zeta * math.sqrt(2.0 / math.pi)

    def scaled(self, factor):
        return HalfNormal(self.zeta_sq * factor * factor)

    def to_config(self):
        return {"family": "halfnormal", "zeta_sq": self.zeta_sq}


@dataclass(frozen=True)
class Exponential(TimeDistribution):
    rate: float
    family = "exponential"

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError("exponential durations need rate > 0")

    def sample(self, rng, size=None):
        # inverse CDF; 1 - U stays in (0, 1] so the log never blows up
        return -np.log1p(-rng.random(size)) / self.rate

    def mean(self):
        return 1.0 / self.rate

    def scaled(self, factor):
        return Exponential(self.rate / factor)

    def to_config(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Pareto(TimeDistribution):
    """Power-law durations with tail index ``shape``: the density decays
    like x^-(shape+1) beyond ``x_min``. The mean is finite only for
    shape > 1."""

    shape: float
    x_min: float
    family = "pareto"

    def __post_init__(self):
        if not (self.shape > 0.0 and self.x_min > 0.0):
            raise ValueError("pareto durations need shape > 0 and x_min > 0")

    def sample(self, rng, size=None):
        return self.x_min * (1.0 - rng.random(size)) ** (-1.0 / self.shape)

    def mean(self):
        if self.shape <= 1.0:
            return math.inf
        return self.shape * self.x_min / (self.shape - 1.0)

    def scaled(self, factor):
        return Pareto(self.shape, self.x_min * factor)

    def to_config(self):
        return {"family": "pareto", "shape": self.shape, "x_min": self.x_min}


_FAMILIES = {
    "uniform": (Uniform, ("a", "b")),
    "halfnormal": (HalfNormal, ("zeta_sq",)),
    "exponential": (Exponential, ("rate",)),
    "pareto": (Pareto, ("shape", "x_min")),
}


def from_config(entry: dict) -> TimeDistribution:
    """Build a distribution from its ``to_config`` form."""
    family = entry.get("family")
    if family not in _FAMILIES:
        raise ValueError(
            f"unknown time distribution family {family!r}; "
            f"expected one of {sorted(_FAMILIES)}"
        )
    cls, fields = _FAMILIES[family]
    missing = [f for f in fields if f not in entry]
    if missing:
        raise ValueError(f"time distribution {family!r} is missing params {missing}")
    extra = set(entry) - {"family", *fields}
    if extra:
        raise ValueError(f"time distribution {family!r} got unknown params {sorted(extra)}")
    return cls(*(float(entry[f]) for f in fields))


def sample_time(dist: TimeDistribution, rng: np.random.Generator) -> float:
    """One positive duration draw."""
    return float(dist.sample(rng))
