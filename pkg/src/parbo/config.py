"""Experiment configuration: JSON parsing, validation, canonical echo.

A config is one JSON document. Parsing normalizes shorthand (a bare
strategy string, a single mode/strategy pair instead of an ``arms`` list)
and rejects unknown keys with the offending field path, so
``parse_config(config_to_dict(cfg)) == cfg`` holds for every valid config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .acquisition import AcquisitionStrategy
from .benchmarks import names as benchmark_names
from .scheduler import MODES
from .times import TimeDistribution, from_config as time_dist_from_config

_MODE_PREFIX = {"sequential": "seq", "synchronous": "sync", "asynchronous": "async"}


class ConfigError(ValueError):
    """A config field is missing, has the wrong type, or an invalid value."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Arm:
    """One (scheduling mode, strategy) pair to run and report."""

    name: str
    mode: str
    strategy: AcquisitionStrategy


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str
    arms: tuple[Arm, ...]
    workers: int
    horizon: float | None
    budget: int | None
    time_dist: TimeDistribution
    unit_mean_times: bool
    noise_sd: float | None
    init_count: int
    refit_period: int | None
    refit_budget: int
    candidate_count: int
    time_grid_points: int
    runs: int
    base_seed: int
    save_traces: bool
    out_dir: str | None

    def effective_time_dist(self) -> TimeDistribution:
        """The distribution actually simulated, normalized to unit mean
        when requested (verified analytically)."""
        if not self.unit_mean_times:
            return self.time_dist
        dist = self.time_dist.unit_mean()
        if abs(dist.mean() - 1.0) > 1e-9:
            raise ConfigError("time_distribution", "unit-mean normalization failed")
        return dist


def _get(obj: dict, key: str, path: str, kind, default=...,
         required_msg: str = "missing required field"):
    # an explicit JSON null means "not set"
    if key not in obj or obj[key] is None:
        if default is ...:
            raise ConfigError(f"{path}.{key}", required_msg)
        return default
    val = obj[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if not isinstance(val, kind) or (kind is not bool and isinstance(val, bool)):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _parse_strategy(raw, path: str) -> AcquisitionStrategy:
    if isinstance(raw, str):
        raw = {"kind": raw, "params": {}}
    if not isinstance(raw, dict):
        raise ConfigError(path, "strategy must be a kind string or an object")
    extra = set(raw) - {"kind", "params"}
    if extra:
        raise ConfigError(path, f"unknown strategy fields {sorted(extra)}")
    kind = _get(raw, "kind", path, str)
    params = _get(raw, "params", path, dict, default={})
    try:
        return AcquisitionStrategy(kind, params)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_arm(raw: dict, path: str, used_names: set[str]) -> Arm:
    if not isinstance(raw, dict):
        raise ConfigError(path, "arm must be an object with mode and strategy")
    extra = set(raw) - {"name", "mode", "strategy"}
    if extra:
        raise ConfigError(path, f"unknown arm fields {sorted(extra)}")
    mode = _get(raw, "mode", path, str)
    if mode not in MODES:
        raise ConfigError(f"{path}.mode", f"expected one of {MODES}, got {mode!r}")
    strategy = _parse_strategy(raw.get("strategy"), f"{path}.strategy")
    name = raw.get("name") or f"{_MODE_PREFIX[mode]}-{strategy.kind}"
    if not isinstance(name, str):
        raise ConfigError(f"{path}.name", "arm name must be a string")
    if name in used_names:
        raise ConfigError(f"{path}.name", f"duplicate arm name {name!r}")
    used_names.add(name)
    return Arm(name, mode, strategy)


_TOP_KEYS = {
    "benchmark", "arms", "mode", "strategy", "workers", "horizon", "budget",
    "time_distribution", "unit_mean_times", "noise_sd", "init_count",
    "refit_period", "refit_budget", "candidate_count", "time_grid_points",
    "runs", "base_seed", "save_traces", "out_dir",
}


def parse_config(obj: dict) -> ExperimentConfig:
    """Validate a JSON-style mapping into an :class:`ExperimentConfig`."""
    if not isinstance(obj, dict):
        raise ConfigError("config", "top level must be an object")
    obj = {k: v for k, v in obj.items() if v is not None}  # null means unset
    extra = set(obj) - _TOP_KEYS
    if extra:
        raise ConfigError("config", f"unknown fields {sorted(extra)}")

    benchmark = _get(obj, "benchmark", "config", str)
    if benchmark not in benchmark_names():
        raise ConfigError(
            "config.benchmark",
            f"unknown benchmark {benchmark!r}; available: {', '.join(benchmark_names())}",
        )

    used: set[str] = set()
    if "arms" in obj:
        if "mode" in obj or "strategy" in obj:
            raise ConfigError("config", "give either arms or top-level mode/strategy, not both")
        raw_arms = obj["arms"]
        if not isinstance(raw_arms, list) or not raw_arms:
            raise ConfigError("config.arms", "must be a non-empty list")
        arms = tuple(
            _parse_arm(a, f"config.arms[{i}]", used) for i, a in enumerate(raw_arms)
        )
    else:
        if "mode" not in obj or "strategy" not in obj:
            raise ConfigError("config", "need either arms or mode+strategy")
        arms = (
            _parse_arm(
                {"mode": obj["mode"], "strategy": obj["strategy"]}, "config", used
            ),
        )

    horizon = _get(obj, "horizon", "config", float, default=None)
    budget = _get(obj, "budget", "config", int, default=None)
    if (horizon is None) == (budget is None):
        raise ConfigError("config", "set exactly one of horizon and budget")
    if horizon is not None and horizon <= 0:
        raise ConfigError("config.horizon", "must be positive")
    if budget is not None and budget < 1:
        raise ConfigError("config.budget", "must be at least 1")

    raw_dist = _get(obj, "time_distribution", "config", dict)
    try:
        time_dist = time_dist_from_config(raw_dist)
    except ValueError as exc:
        raise ConfigError("config.time_distribution", str(exc)) from None

    runs = _get(obj, "runs", "config", int, default=1)
    if runs < 1:
        raise ConfigError("config.runs", "must be at least 1")
    workers = _get(obj, "workers", "config", int, default=1)
    if workers < 1:
        raise ConfigError("config.workers", "must be at least 1")

    def positive(key, default):
        val = _get(obj, key, "config", int, default=default)
        if val < 0:
            raise ConfigError(f"config.{key}", "must be nonnegative")
        return val

    noise_sd = _get(obj, "noise_sd", "config", float, default=None)
    if noise_sd is not None and noise_sd < 0:
        raise ConfigError("config.noise_sd", "must be nonnegative")
    candidate_count = _get(obj, "candidate_count", "config", int, default=500)
    if candidate_count < 1:
        raise ConfigError("config.candidate_count", "must be at least 1")
    time_grid_points = _get(obj, "time_grid_points", "config", int, default=100)
    if time_grid_points < 1:
        raise ConfigError("config.time_grid_points", "must be at least 1")
    refit_period = _get(obj, "refit_period", "config", int, default=25)
    if refit_period == 0:
        refit_period = None
    if refit_period is not None and refit_period < 0:
        raise ConfigError("config.refit_period", "must be nonnegative (0 disables refits)")
    refit_budget = _get(obj, "refit_budget", "config", int, default=100)
    if refit_budget < 1:
        raise ConfigError("config.refit_budget", "must be at least 1")

    cfg = ExperimentConfig(
        benchmark=benchmark,
        arms=arms,
        workers=workers,
        horizon=horizon,
        budget=budget,
        time_dist=time_dist,
        unit_mean_times=_get(obj, "unit_mean_times", "config", bool, default=False),
        noise_sd=noise_sd,
        init_count=positive("init_count", 10),
        refit_period=refit_period,
        refit_budget=refit_budget,
        candidate_count=candidate_count,
        time_grid_points=time_grid_points,
        runs=runs,
        base_seed=_get(obj, "base_seed", "config", int, default=0),
        save_traces=_get(obj, "save_traces", "config", bool, default=False),
        out_dir=_get(obj, "out_dir", "config", str, default=None),
    )
    try:
        cfg.effective_time_dist()  # preflight: normalization must be possible
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("config.time_distribution", str(exc)) from None
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Canonical JSON form; feeding it back to parse_config reproduces cfg."""
    return {
        "benchmark": cfg.benchmark,
        "arms": [
            {
                "name": a.name,
                "mode": a.mode,
                "strategy": {"kind": a.strategy.kind, "params": dict(a.strategy.params)},
            }
            for a in cfg.arms
        ],
        "workers": cfg.workers,
        "horizon": cfg.horizon,
        "budget": cfg.budget,
        "time_distribution": cfg.time_dist.to_config(),
        "unit_mean_times": cfg.unit_mean_times,
        "noise_sd": cfg.noise_sd,
        "init_count": cfg.init_count,
        "refit_period": 0 if cfg.refit_period is None else cfg.refit_period,
        "refit_budget": cfg.refit_budget,
        "candidate_count": cfg.candidate_count,
        "time_grid_points": cfg.time_grid_points,
        "runs": cfg.runs,
        "base_seed": cfg.base_seed,
        "save_traces": cfg.save_traces,
        "out_dir": cfg.out_dir,
    }


def loads(text: str) -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return parse_config(obj)


def dumps(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
