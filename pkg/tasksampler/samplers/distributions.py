"""Explicit laws over K-class category sets and tools to compare them."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Protocol, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from tasksampler.errors import DistributionMismatchError
from tasksampler.fewshot import CategorySet

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-9

SetKey = Tuple[int, ...]


class SetSampler(Protocol):
    num_classes: int
    k: int

    def sample(self, rng: np.random.Generator) -> CategorySet: ...


@dataclass(frozen=True, eq=False)
class SetDistribution:
    """Probability of each K-subset, keyed by its ascending class tuple.

    Sets missing from `probabilities` have probability 0. Empirical laws also
    carry the raw `counts` they were built from.
    """

    num_classes: int
    k: int
    probabilities: Mapping[SetKey, float]
    counts: Optional[Mapping[SetKey, int]] = field(default=None)

    def __post_init__(self):
        total = 0.0
        for key, p in self.probabilities.items():
            if len(key) != self.k or list(key) != sorted(set(key)):
                raise ValueError(f"{key} is not an ascending {self.k}-subset")
            if key[0] < 0 or key[-1] >= self.num_classes:
                raise ValueError(f"{key} outside [0, {self.num_classes})")
            if p < 0:
                raise ValueError(f"negative probability for {key}")
            total += p
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @property
    def draws(self) -> Optional[int]:
        return None if self.counts is None else int(sum(self.counts.values()))

    def probability(self, classes) -> float:
        return float(self.probabilities.get(tuple(sorted(int(c) for c in classes)), 0.0))

    def support(self) -> List[Tuple[CategorySet, float]]:
        return [(CategorySet(key), p) for key, p in self.probabilities.items()]

    def mode(self) -> SetKey:
        return max(self.probabilities, key=lambda key: (self.probabilities[key], [-c for c in key]))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float


def _check_universe(a: SetDistribution, b: SetDistribution) -> None:
    if (a.num_classes, a.k) != (b.num_classes, b.k):
        raise DistributionMismatchError(
            f"universes differ: {a.num_classes} classes/k={a.k} vs {b.num_classes} classes/k={b.k}"
        )


def distribution_distance(a: SetDistribution, b: SetDistribution) -> float:
    """Total variation distance, 0.5 * sum |p_a - p_b| over all K-subsets."""
    _check_universe(a, b)
    keys = set(a.probabilities) | set(b.probabilities)
    return 0.5 * float(sum(abs(a.probability(key) - b.probability(key)) for key in keys))


def empirical_distribution(sampler: SetSampler, draws: int, rng: np.random.Generator) -> SetDistribution:
    """Frequency table of `draws` category sets from `sampler`."""
    if draws < 1:
        raise ValueError("draws must be at least 1")
    counts: Dict[SetKey, int] = Counter(sampler.sample(rng).key for _ in range(draws))
    ordered = dict(sorted(counts.items()))
    return SetDistribution(
        sampler.num_classes,
        sampler.k,
        {key: count / draws for key, count in ordered.items()},
        counts=ordered,
    )


def chi_square(empirical: SetDistribution, reference: SetDistribution, min_expected: float = 5.0) -> ChiSquareResult:
    """Pearson goodness of fit of empirical counts against a reference law.

    Bins whose expected count falls below `min_expected` are pooled together;
    a draw on a set the reference gives probability 0 fails outright.
    """
    _check_universe(empirical, reference)
    if empirical.counts is None:
        raise ValueError("chi-square needs an empirical distribution with counts")
    draws = empirical.draws
    impossible = [key for key in empirical.counts if reference.probability(key) == 0.0]
    if impossible:
        logger.warning("sampler produced %d sets with reference probability 0", len(impossible))
        return ChiSquareResult(float("inf"), 0, 0.0)

    keys = [key for key, p in reference.probabilities.items() if p > 0]
    expected = np.array([reference.probabilities[key] for key in keys]) * draws
    observed = np.array([empirical.counts.get(key, 0) for key in keys], dtype=np.float64)
    order = np.argsort(expected, kind="stable")
    expected, observed = expected[order], observed[order]

    small = expected < min_expected
    if small.any():
        pooled_e, pooled_o = expected[small].sum(), observed[small].sum()
        expected, observed = expected[~small], observed[~small]
        if pooled_e < min_expected and len(expected):
            pooled_e, pooled_o = pooled_e + expected[0], pooled_o + observed[0]
            expected, observed = expected[1:], observed[1:]
        expected = np.append(expected, pooled_e)
        observed = np.append(observed, pooled_o)
    if len(expected) < 2:
        return ChiSquareResult(0.0, 0, 1.0)
    expected = expected * observed.sum() / expected.sum()
    statistic, p_value = stats.chisquare(observed, expected)
    return ChiSquareResult(float(statistic), len(expected) - 1, float(p_value))


def write_distribution_csv(distribution: SetDistribution, path: Path) -> None:
    rows = sorted(distribution.probabilities.items(), key=lambda item: (-item[1], item[0]))
    frame = pd.DataFrame(
        {
            "class_ids": [";".join(str(c) for c in key) for key, _ in rows],
            "probability": [p for _, p in rows],
        }
    )
    frame.to_csv(path, index=False, float_format="%.12f")
