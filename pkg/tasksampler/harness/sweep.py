"""Sensitivity of gcp-sampling to the update scale alpha and the discount tau."""
import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from tasksampler.harness.compare import derive_config, run_many
from tasksampler.schemas import RunConfig
from tasksampler.utils import mean_ci95

logger = logging.getLogger(__name__)

FIXED_TAU = 0.5
FIXED_ALPHA = 1.0


def sweep_hyperparameters(
    config: RunConfig,
    alphas: Sequence[float],
    taus: Sequence[float],
    seeds: Sequence[int],
    out_dir: Path,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Vary alpha with tau fixed at 0.5, then tau with alpha fixed at 1; write sweep.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings_grid = [("alpha", a, FIXED_TAU) for a in alphas] + [("tau", FIXED_ALPHA, t) for t in taus]
    configs, varied = [], []
    for name, alpha, tau in settings_grid:
        for seed in seeds:
            run_dir = out_dir / f"{name}-alpha{alpha:g}-tau{tau:g}" / f"seed{seed}"
            configs.append(derive_config(config, alpha=alpha, tau=tau, seed=seed, out=run_dir))
            varied.append(name)

    results = pd.DataFrame(run_many(configs, workers))
    results.insert(0, "varied", varied)
    rows = []
    for (name, alpha, tau), group in results.groupby(["varied", "alpha", "tau"], sort=False):
        mean, ci95 = mean_ci95(group["accuracy"].to_numpy())
        rows.append({"varied": name, "alpha": alpha, "tau": tau, "seeds": len(group), "accuracy_mean": mean, "accuracy_ci95": ci95})
        logger.info("%s sweep alpha=%g tau=%g: accuracy %.4f +- %.4f", name, alpha, tau, mean, ci95)
    summary = pd.DataFrame(rows)
    summary.to_csv(out_dir / "sweep.csv", index=False, float_format="%.6f")
    return summary
