"""Parallel Thompson-sampling Bayesian optimisation, simulated end to end.

The package couples a small exact-GP engine with sequential, synchronous,
and asynchronous scheduling of M workers under random evaluation times,
plus regret metrics and validators for the closed-form throughput and
information-gain results the schedulers are built on.
"""

from .acquisition import (
    AcquisitionStrategy,
    expected_improvement,
    hallucinate,
    select_ei,
    select_random,
    select_ts,
    select_ucb,
    uncertainty_init,
)
from .benchmarks import Benchmark, get as get_benchmark, names as benchmark_names
from .config import Arm, ConfigError, ExperimentConfig, parse_config
from .gp import (
    Dataset,
    FactorizationError,
    GpPosterior,
    Kernel,
    condition,
    fit_hyperparams,
    kernel_eval,
    log_marginal_likelihood,
    sample_joint,
)
from .harness import ReportBundle, TheoryOptions, emit_plot_data, run_experiment, run_theory_suite
from .metrics import (
    MeanRegretCurve,
    RegretCurve,
    bayes_average,
    simple_regret_by_count,
    simple_regret_by_time,
)
from .scheduler import (
    ASYNCHRONOUS,
    SEQUENTIAL,
    SYNCHRONOUS,
    EvaluationRecord,
    ModelConfig,
    Trace,
    count_completed,
    run_simulation,
)
from .times import Exponential, HalfNormal, Pareto, TimeDistribution, Uniform, sample_time

__all__ = [
    "AcquisitionStrategy",
    "Arm",
    "ASYNCHRONOUS",
    "Benchmark",
    "ConfigError",
    "Dataset",
    "EvaluationRecord",
    "ExperimentConfig",
    "Exponential",
    "FactorizationError",
    "GpPosterior",
    "HalfNormal",
    "Kernel",
    "MeanRegretCurve",
    "ModelConfig",
    "Pareto",
    "RegretCurve",
    "ReportBundle",
    "SEQUENTIAL",
    "SYNCHRONOUS",
    "TheoryOptions",
    "TimeDistribution",
    "Trace",
    "Uniform",
    "bayes_average",
    "benchmark_names",
    "condition",
    "count_completed",
    "emit_plot_data",
    "expected_improvement",
    "fit_hyperparams",
    "get_benchmark",
    "hallucinate",
    "kernel_eval",
    "log_marginal_likelihood",
    "parse_config",
    "run_experiment",
    "run_simulation",
    "run_theory_suite",
    "sample_joint",
    "sample_time",
    "select_ei",
    "select_random",
    "select_ts",
    "select_ucb",
    "simple_regret_by_count",
    "simple_regret_by_time",
    "uncertainty_init",
]
