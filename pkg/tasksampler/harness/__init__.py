from tasksampler.harness.bench import bench_grid, bench_overhead
from tasksampler.harness.compare import compare_strategies
from tasksampler.harness.evaluation import EvaluationResult, RecoveryResult, evaluate, potential_recovery
from tasksampler.harness.sweep import sweep_hyperparameters
from tasksampler.harness.training import Trainer, TrainingRun, run_training
from tasksampler.harness.verification import LawReport, counterexample_matrix, verify_greedy_law

__all__ = [
    "bench_grid",
    "bench_overhead",
    "compare_strategies",
    "EvaluationResult",
    "RecoveryResult",
    "evaluate",
    "potential_recovery",
    "sweep_hyperparameters",
    "Trainer",
    "TrainingRun",
    "run_training",
    "LawReport",
    "counterexample_matrix",
    "verify_greedy_law",
]
