"""Exact check of how closely greedy class-pair sampling follows the
product-of-potentials law it approximates."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from tasksampler.errors import EnumerationCapError
from tasksampler.potentials import PotentialMatrix
from tasksampler.samplers.distributions import chi_square, distribution_distance, empirical_distribution
from tasksampler.samplers.pairs import exact_cp_distribution, exact_gcp_distribution, sample_task_gcp
from tasksampler.schemas import LawComparisonRow

logger = logging.getLogger(__name__)

MAX_CLASSES = 8
MAX_K = 5
SIGNIFICANCE = 0.001

# Asymmetric potentials where the greedy law strictly differs from the exact one:
# P_greedy({0,1,2}) = 121/420 while P_exact({0,1,2}) = 6/21.
COUNTEREXAMPLE_PAIRS = {(0, 1): 2.0, (0, 2): 3.0, (0, 3): 1.0, (1, 2): 1.0, (1, 3): 4.0, (2, 3): 1.0}


def counterexample_matrix() -> PotentialMatrix:
    return PotentialMatrix.from_pairs(4, COUNTEREXAMPLE_PAIRS)


def random_lognormal_matrix(num_classes: int, rng: np.random.Generator, sigma: float = 1.0) -> PotentialMatrix:
    table = np.zeros((num_classes, num_classes))
    rows, cols = np.triu_indices(num_classes, k=1)
    table[rows, cols] = rng.normal(0.0, sigma, size=len(rows))
    return PotentialMatrix(num_classes, table + table.T)


@dataclass
class GreedySetSampler:
    matrix: PotentialMatrix
    k: int

    @property
    def num_classes(self) -> int:
        return self.matrix.num_classes

    def sample(self, rng: np.random.Generator):
        return sample_task_gcp(self.matrix, self.k, rng)


@dataclass
class LawReport:
    rows: List[LawComparisonRow]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows])

    def failing_rows(self, significance: float = SIGNIFICANCE) -> List[LawComparisonRow]:
        return [row for row in self.rows if row.p_value < significance]


def compare_laws(
    label: str, matrix: PotentialMatrix, k: int, draws: int, rng: np.random.Generator, cap: Optional[int] = None
) -> LawComparisonRow:
    cp = exact_cp_distribution(matrix, k, cap=cap)
    gcp = exact_gcp_distribution(matrix, k, cap=cap)
    empirical = empirical_distribution(GreedySetSampler(matrix, k), draws, rng)
    fit = chi_square(empirical, gcp)
    first = tuple(range(k))
    keys = set(cp.probabilities) | set(gcp.probabilities)
    row = LawComparisonRow(
        matrix=label,
        num_classes=matrix.num_classes,
        k=k,
        tv_distance=distribution_distance(cp, gcp),
        max_abs_difference=max(abs(cp.probability(key) - gcp.probability(key)) for key in keys),
        chi_square=fit.statistic,
        degrees_of_freedom=fit.degrees_of_freedom,
        p_value=fit.p_value,
        p_cp_first=cp.probability(first),
        p_gcp_first=gcp.probability(first),
    )
    if row.p_value < SIGNIFICANCE:
        logger.warning("%s (k=%d): greedy draws disagree with their exact law, p=%.2e", label, k, row.p_value)
    return row


def verify_greedy_law(
    num_classes: int,
    k: int,
    num_matrices: int,
    rng: np.random.Generator,
    draws: int = 20_000,
    sigma: float = 1.0,
    cap: Optional[int] = None,
) -> LawReport:
    """Exact vs greedy class-pair laws on random, constant and counterexample matrices.

    Every matrix is checked at the requested k and at the k=2 base case.
    """
    if num_classes > MAX_CLASSES or k > MAX_K:
        raise EnumerationCapError(
            f"verification is limited to {MAX_CLASSES} classes and k <= {MAX_K}, got {num_classes} and {k}"
        )
    if not 2 <= k <= num_classes:
        raise ValueError(f"k={k} must lie in [2, {num_classes}]")

    cases: List[Tuple[str, PotentialMatrix]] = [
        (f"lognormal-{i}", random_lognormal_matrix(num_classes, rng, sigma)) for i in range(num_matrices)
    ]
    cases.append(("constant", PotentialMatrix.from_potentials(np.full((num_classes, num_classes), 3.0))))

    rows = []
    for label, matrix in cases:
        for size in sorted({2, k}):
            rows.append(compare_laws(label, matrix, size, draws, rng, cap))
    rows.append(compare_laws("counterexample", counterexample_matrix(), 3, draws, rng, cap))

    worst = max(rows, key=lambda row: row.tv_distance)
    logger.info("verified %d cases; largest TV distance %.3e (%s, k=%d)", len(rows), worst.tv_distance, worst.matrix, worst.k)
    return LawReport(rows)
