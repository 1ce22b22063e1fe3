"""Strategy comparisons over shared seeds."""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from tasksampler.config import settings
from tasksampler.harness.training import run_training
from tasksampler.schemas import RunConfig, SamplingStrategy, StrategySummaryRow
from tasksampler.utils import mean_ci95

logger = logging.getLogger(__name__)


def derive_config(config: RunConfig, **changes) -> RunConfig:
    """Validated copy of `config` with some fields replaced."""
    return RunConfig.model_validate({**config.model_dump(), **changes})


def final_result(config: RunConfig) -> Dict:
    """Train once and keep the last evaluation row; top-level so worker processes can run it."""
    run = run_training(config)
    final = run.final_metrics
    return {
        "seed": config.seed,
        "strategy": config.strategy.value,
        "alpha": config.alpha,
        "tau": config.tau,
        "accuracy": final.eval_accuracy_mean,
        "ci95": final.eval_accuracy_ci95,
        "spearman_distance": run.recovery.spearman_distance if run.recovery else float("nan"),
    }


def run_many(configs: Sequence[RunConfig], workers: Optional[int] = None) -> List[Dict]:
    workers = settings.workers if workers is None else workers
    if workers <= 1:
        return [final_result(config) for config in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(final_result, configs))


def compare_strategies(
    config: RunConfig,
    strategies: Sequence[SamplingStrategy],
    seeds: Sequence[int],
    out_dir: Path,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Run every strategy on every seed; write per_seed.csv and summary.csv.

    Each seed fixes the dataset, initial weights, episode stream and
    evaluation tasks, so results are paired across strategies.
    """
    if len(seeds) < 2:
        raise ValueError("compare needs at least two seeds")
    strategies = [SamplingStrategy(s) for s in strategies]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = [
        derive_config(config, strategy=strategy, seed=seed, out=out_dir / strategy.value / f"seed{seed}")
        for strategy in strategies
        for seed in seeds
    ]
    per_seed = pd.DataFrame(run_many(configs, workers))
    per_seed.to_csv(out_dir / "per_seed.csv", index=False, float_format="%.10g")

    by_strategy = {s: per_seed[per_seed["strategy"] == s.value].sort_values("seed")["accuracy"].to_numpy() for s in strategies}
    baseline = by_strategy.get(SamplingStrategy.RANDOM)
    rows = []
    for strategy, accuracies in by_strategy.items():
        mean, ci95 = mean_ci95(accuracies)
        p_value = None
        if baseline is not None and strategy is not SamplingStrategy.RANDOM:
            differences = accuracies - baseline
            if np.any(differences != 0):
                p_value = float(stats.ttest_rel(accuracies, baseline, alternative="greater").pvalue)
        rows.append(
            StrategySummaryRow(
                strategy=strategy, seeds=len(accuracies), accuracy_mean=mean, accuracy_ci95=ci95, paired_p_value=p_value
            )
        )
        logger.info("%s: accuracy %.4f +- %.4f (paired p vs random: %s)", strategy.value, mean, ci95, p_value)
    summary = pd.DataFrame([row.model_dump(mode="json") for row in rows])
    summary.to_csv(out_dir / "summary.csv", index=False, float_format="%.6f")
    return summary
