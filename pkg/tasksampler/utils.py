from typing import List, Sequence, Tuple

import numpy as np


def categorical_from_log(log_weights: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from unnormalized log weights; -inf entries are never drawn."""
    log_weights = np.asarray(log_weights, dtype=np.float64)
    top = log_weights.max()
    if not np.isfinite(top):
        raise ValueError("no positive finite weight to draw from")
    cdf = np.cumsum(np.exp(log_weights - top))
    index = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    # float slack can push the draw past the last positive entry
    if index >= len(cdf):
        index = int(np.flatnonzero(log_weights > -np.inf)[-1])
    return index


def spawn_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    """Independent child seeds; a generator built twice from one child replays the same stream."""
    return np.random.SeedSequence(seed).spawn(count)


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(child) for child in spawn_seeds(seed, count)]


def mean_ci95(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and 1.96 * standard error (sample standard deviation)."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(1.96 * values.std(ddof=1) / np.sqrt(len(values)))
