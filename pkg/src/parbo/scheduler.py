"""Deterministic discrete-event simulation of parallel function evaluation.

M workers execute an acquisition strategy either sequentially, in
synchronous batches (a barrier after every M dispatches), or
asynchronously (a worker is re-deployed the moment it finishes). Durations
are drawn from a :class:`~parbo.times.TimeDistribution`; the model only
ever sees evaluations that have already finished, so the selection at
dispatch j is conditioned on exactly the completed history at that time.

Everything is driven by one seeded generator in a fixed order, so a trace
is bit-reproducible from (config, seed). Simultaneous finishes are
ordered by (time, worker id).
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc
from threadpoolctl import threadpool_limits

from .acquisition import (
    AcquisitionStrategy,
    hallucinate,
    select_ei,
    select_random,
    select_ts,
    select_ucb,
)
from .benchmarks import Benchmark
from .gp import Dataset, Kernel, condition, fit_hyperparams
from .times import TimeDistribution

SEQUENTIAL = "sequential"
SYNCHRONOUS = "synchronous"
ASYNCHRONOUS = "asynchronous"
MODES = (SEQUENTIAL, SYNCHRONOUS, ASYNCHRONOUS)


@dataclass(frozen=True)
class EvaluationRecord:
    """One completed evaluation; ``index`` is the dispatch order (1-based)."""

    index: int
    worker: int
    point: np.ndarray
    observed: float
    clean: float
    dispatch_time: float
    finish_time: float


@dataclass(frozen=True)
class Trace:
    """Completed evaluations in finish order, plus run geometry.

    Evaluations still in flight at the horizon are dropped; ``dispatched``
    counts every dispatch, so dropped jobs show up as index gaps.
    """

    records: tuple[EvaluationRecord, ...]
    mode: str
    m_workers: int
    horizon: float | None
    dispatched: int

    def count_completed(self, t: float) -> int:
        return sum(1 for r in self.records if r.finish_time <= t)

    def to_csv(self, fh) -> None:
        """index, worker, dispatch_time, finish_time, value, x0..x{d-1}."""
        dim = self.records[0].point.size if self.records else 0
        writer = csv.writer(fh)
        writer.writerow(
            ["index", "worker", "dispatch_time", "finish_time", "value"]
            + [f"x{i}" for i in range(dim)]
        )
        for r in self.records:
            writer.writerow(
                [r.index, r.worker]
                + [format(v, ".17g") for v in (r.dispatch_time, r.finish_time, r.observed)]
                + [format(v, ".17g") for v in r.point]
            )


def count_completed(trace: Trace, t: float) -> int:
    """Number of evaluations with finish_time <= t."""
    return trace.count_completed(t)


@dataclass(frozen=True)
class ModelConfig:
    """Prior GP used until the first hyperparameter refit."""

    family: str = "se"
    bandwidth: float = 0.25
    scale: float = 1.0
    noise_var: float = 0.01
    mean_const: float = 0.0


class _Engine:
    """Mutable simulation state shared by the three scheduling modes."""

    def __init__(
        self,
        strategy: AcquisitionStrategy,
        objective: Benchmark,
        time_dist: TimeDistribution,
        rng: np.random.Generator,
        init_count: int,
        refit_period: int | None,
        refit_budget: int,
        candidate_count: int,
        model: ModelConfig,
    ):
        self.strategy = strategy
        self.objective = objective
        self.time_dist = time_dist
        self.rng = rng
        self.init_count = init_count
        self.refit_period = refit_period
        self.refit_budget = refit_budget
        self.candidate_count = candidate_count
        self.dim = objective.dim

        self.kernel = Kernel(
            model.family, np.full(self.dim, model.bandwidth), model.scale
        )
        self.noise_var = model.noise_var
        self.mean_const = model.mean_const

        self.points: list[np.ndarray] = []
        self.values: list[float] = []
        self._posterior = None
        self._halton = qmc.Halton(self.dim, scramble=True, seed=rng)

        self.busy: dict[int, np.ndarray] = {}
        self.records: list[EvaluationRecord] = []
        self.dispatched = 0

    # -- model ---------------------------------------------------------

    def posterior(self):
        if self._posterior is None:
            pts = (
                np.asarray(self.points)
                if self.points
                else np.zeros((0, self.dim))
            )
            data = Dataset(pts, np.asarray(self.values))
            self._posterior = condition(
                self.kernel, data, self.noise_var, self.mean_const
            )
        return self._posterior

    def _maybe_refit(self):
        n = len(self.records)
        if (
            self.refit_period
            and self.strategy.uses_model
            and n >= 2
            and n % self.refit_period == 0
        ):
            data = Dataset(np.asarray(self.points), np.asarray(self.values))
            self.kernel, self.noise_var, self.mean_const = fit_hyperparams(
                data, self.kernel.family, self.refit_budget, self.rng
            )
            self._posterior = None

    # -- dispatch / completion ------------------------------------------

    def _select(self, in_flight: list[np.ndarray]) -> np.ndarray:
        step = self.dispatched + 1
        if step <= self.init_count:
            return self.rng.random(self.dim)
        candidates = self._halton.random(self.candidate_count)
        if self.strategy.kind == "random":
            return select_random(candidates, self.rng)
        post = self.posterior()
        if self.strategy.hallucinates and in_flight:
            post = hallucinate(post, np.asarray(in_flight))
        if self.strategy.kind in ("ts", "hts"):
            return select_ts(post, candidates, self.rng)
        if self.strategy.kind in ("ucb", "hucb"):
            return select_ucb(
                post, candidates, step, self.dim, self.strategy.ucb_coefficient()
            )
        best_y = max(self.values) if self.values else self.mean_const
        return select_ei(post, candidates, best_y)

    def dispatch(self, worker: int, t: float):
        """Pick a point, draw its observation and duration, occupy the worker."""
        in_flight = [p for _, p in sorted(self.busy.items())]
        point = self._select(in_flight)
        clean, observed = self.objective.observe(point, self.rng)
        duration = float(self.time_dist.sample(self.rng))
        self.dispatched += 1
        self.busy[worker] = point
        return (t + duration, worker, self.dispatched, point, observed, clean, t)

    def complete(self, event) -> None:
        finish, worker, index, point, observed, clean, start = event
        self.busy.pop(worker, None)
        self.records.append(
            EvaluationRecord(index, worker, point, observed, clean, start, finish)
        )
        self.points.append(point)
        self.values.append(observed)
        self._posterior = None
        self._maybe_refit()


def run_simulation(
    mode: str,
    m_workers: int,
    horizon: float | None,
    strategy: AcquisitionStrategy | str,
    objective: Benchmark,
    time_dist: TimeDistribution,
    *,
    rng: np.random.Generator,
    max_evals: int | None = None,
    init_count: int = 10,
    refit_period: int | None = 25,
    refit_budget: int = 100,
    candidate_count: int = 500,
    model: ModelConfig | None = None,
) -> Trace:
    """Simulate one optimisation run and return its trace.

    Exactly one of ``horizon`` (time budget) and ``max_evals`` (completed
    evaluation budget) must be set. Evaluations still running at the
    horizon are dropped from the trace; in budget mode the trace is cut
    after exactly ``max_evals`` completions (finish order).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if (horizon is None) == (max_evals is None):
        raise ValueError("set exactly one of horizon and max_evals")
    if horizon is not None and horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if max_evals is not None and max_evals < 1:
        raise ValueError("max_evals must be at least 1")
    if m_workers < 1:
        raise ValueError("need at least one worker")
    if isinstance(strategy, str):
        strategy = AcquisitionStrategy(strategy)

    m_eff = 1 if mode == SEQUENTIAL else m_workers
    eng = _Engine(
        strategy,
        objective,
        time_dist,
        rng,
        init_count,
        refit_period,
        refit_budget,
        candidate_count,
        model or ModelConfig(),
    )

    # The GP solves here are small; multithreaded BLAS only adds contention.
    with threadpool_limits(limits=1):
        if mode == SYNCHRONOUS:
            _run_synchronous(eng, m_eff, horizon, max_evals)
        else:
            _run_worker_pool(eng, m_eff, horizon, max_evals)

    return Trace(tuple(eng.records), mode, m_eff, horizon, eng.dispatched)


def _run_worker_pool(eng: _Engine, m: int, horizon, max_evals) -> None:
    """Asynchronous pool (sequential is the m=1 special case): each worker
    is re-deployed immediately when it finishes."""
    heap: list = []
    for w in range(m):
        heapq.heappush(heap, eng.dispatch(w, 0.0))
    while heap:
        event = heapq.heappop(heap)
        finish, worker = event[0], event[1]
        if horizon is not None and finish > horizon:
            continue  # still in flight at the deadline: never observed
        eng.complete(event)
        if max_evals is not None and len(eng.records) >= max_evals:
            return
        if horizon is None or finish < horizon:
            heapq.heappush(heap, eng.dispatch(worker, finish))


def _run_synchronous(eng: _Engine, m: int, horizon, max_evals) -> None:
    """Batches of m dispatches with a barrier: the next batch starts at the
    latest finish time of the previous one."""
    t = 0.0
    while (horizon is None or t < horizon) and (
        max_evals is None or len(eng.records) < max_evals
    ):
        batch = [eng.dispatch(w, t) for w in range(m)]
        eng.busy.clear()  # barrier: nothing is in flight once the batch is out
        batch.sort(key=lambda ev: (ev[0], ev[1]))
        for event in batch:
            if horizon is not None and event[0] > horizon:
                continue
            eng.complete(event)
            if max_evals is not None and len(eng.records) >= max_evals:
                break
        t = max(ev[0] for ev in batch)
