"""Simple-regret curves and cross-run averaging.

Regret is measured on the *clean* (noise-free) values of the evaluated
points even though the optimiser only ever observed noisy values: the
target quantity is the gap between the global optimum and the best point
actually queried. Before any evaluation completes, the regret by time is
pinned at the worst possible deviation for the benchmark.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .scheduler import Trace

BY_COUNT = "count"
BY_TIME = "time"


@dataclass(frozen=True)
class RegretCurve:
    """One run's simple regret against evaluation count or time."""

    axis: str
    coords: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if coords.shape != values.shape or coords.ndim != 1:
            raise ValueError("coords and values must be equal-length 1-d arrays")
        if coords.size > 1 and not np.all(np.diff(coords) > 0):
            raise ValueError("curve coordinates must be strictly increasing")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class MeanRegretCurve:
    """Pointwise mean and standard error of regret over several runs."""

    axis: str
    coords: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    run_count: int
    meta: dict = field(default_factory=dict)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["coordinate", "mean", "stderr", "run_count"])
        for c, m, s in zip(self.coords, self.mean, self.stderr):
            writer.writerow(
                [format(c, ".17g"), format(m, ".17g"), format(s, ".17g"), self.run_count]
            )


def read_mean_curve(fh, axis: str, meta: dict | None = None) -> MeanRegretCurve:
    """Parse a curve written by :meth:`MeanRegretCurve.to_csv`."""
    rows = list(csv.reader(fh))
    if not rows or rows[0] != ["coordinate", "mean", "stderr", "run_count"]:
        raise ValueError("not a regret-curve CSV")
    body = np.array([[float(v) for v in row] for row in rows[1:]])
    if body.size == 0:
        raise ValueError("regret-curve CSV has no data rows")
    return MeanRegretCurve(
        axis, body[:, 0], body[:, 1], body[:, 2], int(body[0, 3]), meta or {}
    )


def simple_regret_by_count(
    trace: Trace, opt_value: float, meta: dict | None = None
) -> RegretCurve:
    """Regret after the first n completed evaluations, for n = 1..N."""
    clean = np.array([r.clean for r in trace.records])
    if clean.size == 0:
        return RegretCurve(BY_COUNT, np.empty(0), np.empty(0), meta or {})
    best = np.maximum.accumulate(clean)
    coords = np.arange(1, clean.size + 1, dtype=float)
    return RegretCurve(BY_COUNT, coords, opt_value - best, meta or {})


def simple_regret_by_time(
    trace: Trace,
    t_grid,
    opt_value: float,
    worst_dev: float,
    meta: dict | None = None,
) -> RegretCurve:
    """Regret over evaluations completed by each grid time.

    Grid times before the first completion get ``worst_dev``, the largest
    possible value gap for the objective.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    finish = np.array([r.finish_time for r in trace.records])
    clean = np.array([r.clean for r in trace.records])
    best = np.maximum.accumulate(clean) if clean.size else clean
    values = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        n = int(np.searchsorted(finish, t, side="right")) if finish.size else 0
        values[i] = worst_dev if n == 0 else opt_value - best[n - 1]
    return RegretCurve(BY_TIME, t_grid, values, meta or {})


def step_interpolate(curve: RegretCurve, grid) -> np.ndarray:
    """Last-value-carried-forward lookup of a curve at grid coordinates.

    Grid points before the curve starts take the first value (for by-time
    curves the grid never precedes the curve since the curve itself starts
    at worst deviation).
    """
    if len(curve) == 0:
        raise ValueError("cannot interpolate an empty regret curve")
    grid = np.asarray(grid, dtype=float)
    idx = np.searchsorted(curve.coords, grid, side="right") - 1
    return curve.values[np.clip(idx, 0, len(curve) - 1)]


def bayes_average(curves: list[RegretCurve], grid) -> MeanRegretCurve:
    """Pointwise mean and standard error over runs on a shared grid."""
    if len(curves) < 2:
        raise ValueError("averaging needs at least two curves")
    axes = {c.axis for c in curves}
    if len(axes) != 1:
        raise ValueError(f"cannot average curves with mixed axes {sorted(axes)}")
    grid = np.asarray(grid, dtype=float)
    stack = np.vstack([step_interpolate(c, grid) for c in curves])
    k = stack.shape[0]
    mean = stack.mean(axis=0)
    stderr = stack.std(axis=0, ddof=1) / np.sqrt(k)
    return MeanRegretCurve(curves[0].axis, grid, mean, stderr, k)
