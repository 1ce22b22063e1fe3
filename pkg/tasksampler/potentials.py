"""Class-pair potentials and their multiplicative difficulty updates.

Potentials are kept as log C(i, j); C starts at one for every pair. An
update multiplies C(i, j)^tau by exp(alpha * score), i.e. in log domain
new = tau * old + alpha * score.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from tasksampler.errors import ClassRangeError, NonFiniteError, PredictionShapeError
from tasksampler.fewshot import Episode
from tasksampler.learner import PredictionBatch
from tasksampler.schemas import ExponentRule, PotentialDecay, Strategy

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _pair_index(num_classes: int) -> Tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(num_classes, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(eq=False)
class PotentialMatrix:
    """Symmetric log-domain class-pair potentials; the diagonal is never read."""

    num_classes: int
    log_potentials: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"need at least two classes, got {self.num_classes}")
        if self.log_potentials is None:
            self.log_potentials = np.zeros((self.num_classes, self.num_classes))
            return
        table = np.array(self.log_potentials, dtype=np.float64)
        if table.shape != (self.num_classes, self.num_classes):
            raise ValueError(f"log_potentials shape {table.shape} does not match {self.num_classes} classes")
        np.fill_diagonal(table, 0.0)
        if not np.all(np.isfinite(table)):
            raise NonFiniteError("log potentials must be finite")
        if not np.array_equal(table, table.T):
            raise ValueError("log potentials must be symmetric")
        self.log_potentials = table

    @classmethod
    def ones(cls, num_classes: int) -> "PotentialMatrix":
        return cls(num_classes)

    @classmethod
    def from_potentials(cls, potentials: Sequence[Sequence[float]]) -> "PotentialMatrix":
        """Build from a linear-domain table; the diagonal is ignored."""
        table = np.array(potentials, dtype=np.float64)
        np.fill_diagonal(table, 1.0)
        if np.any(table <= 0):
            raise ValueError("potentials must be strictly positive")
        return cls(table.shape[0], np.log(table))

    @classmethod
    def from_pairs(cls, num_classes: int, pairs: dict) -> "PotentialMatrix":
        """All-ones matrix with the listed {(i, j): C(i, j)} entries overridden."""
        table = np.ones((num_classes, num_classes))
        for (i, j), value in pairs.items():
            table[i, j] = table[j, i] = value
        return cls.from_potentials(table)

    def check_class(self, class_id: int) -> None:
        if not 0 <= class_id < self.num_classes:
            raise ClassRangeError(f"class {class_id} outside [0, {self.num_classes})")

    def log_potential(self, i: int, j: int) -> float:
        self.check_class(i)
        self.check_class(j)
        if i == j:
            raise ClassRangeError(f"pair ({i}, {j}) is on the diagonal")
        return float(self.log_potentials[i, j])

    def potential(self, i: int, j: int) -> float:
        return float(np.exp(self.log_potential(i, j)))

    def copy(self) -> "PotentialMatrix":
        return PotentialMatrix(self.num_classes, self.log_potentials.copy())

    def upper_triangle(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, log values) of every unordered pair i < j."""
        rows, cols = _pair_index(self.num_classes)
        return rows, cols, self.log_potentials[rows, cols]


@dataclass(frozen=True)
class PairConfusion:
    pair: Tuple[int, int]
    value: float


def strategy_scores(strategy: Strategy, values: np.ndarray) -> np.ndarray:
    """Exponent scores of pair confusions under a difficulty strategy.

    Hard uses u as-is (it may reach 2); Easy and Uncertain clamp u to [0, 1].
    """
    strategy = Strategy(strategy)
    values = np.asarray(values, dtype=np.float64)
    if strategy is Strategy.HARD:
        return values
    clamped = np.clip(values, 0.0, 1.0)
    if strategy is Strategy.EASY:
        return 1.0 - clamped
    return (1.0 - clamped) * clamped


def strategy_score(strategy: Strategy, u: float) -> float:
    return float(strategy_scores(strategy, np.array([u]))[0])


def effective_alpha(alpha: float, k: int, rule: ExponentRule = ExponentRule.ALPHA) -> float:
    """Update scale for a k-way episode.

    The alpha-root rule spreads alpha over the C(k, 2) pairs of the episode
    (alpha ** (1 / C(k, 2))), the variant that comes out of deriving the
    update from a KL-regularised task distribution.
    """
    if ExponentRule(rule) is ExponentRule.ALPHA_ROOT:
        return float(alpha ** (1.0 / comb(k, 2)))
    return float(alpha)


def pair_confusion(predictions: PredictionBatch, episode: Episode) -> List[PairConfusion]:
    """Average cross-class probability mass for every pair of episode classes.

    value(i, j) = mean_{q labelled j} p(i | q) + mean_{q labelled i} p(j | q).
    """
    k = episode.k_way
    probs = predictions.probabilities
    targets = np.asarray(episode.query_targets)
    if probs.shape[1] != k:
        raise PredictionShapeError(f"prediction rows have {probs.shape[1]} entries for a {k}-way episode")
    n = episode.n_query
    if probs.shape[0] != n * k or len(targets) != n * k:
        raise PredictionShapeError(f"{probs.shape[0]} prediction rows for {n * k} queries")

    # mass[a, b]: summed p(class a) over the queries labelled b
    mass = probs.T @ np.eye(k)[targets]
    means = mass / n
    confusion = means + means.T
    classes = episode.categories.classes
    return [
        PairConfusion(pair=tuple(sorted((classes[a], classes[b]))), value=float(confusion[a, b]))
        for a, b in combinations(range(k), 2)
    ]


def apply_update(
    matrix: PotentialMatrix,
    confusions: Iterable[PairConfusion],
    alpha: float,
    tau: float,
    strategy: Strategy,
    decay: PotentialDecay = PotentialDecay.EPISODE,
    in_place: bool = False,
) -> PotentialMatrix:
    """Multiplicative update of the listed pairs.

    With the default episode decay only the listed pairs change; global decay
    also discounts every other pair by tau.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    confusions = list(confusions)
    if confusions:
        pairs = np.array([c.pair for c in confusions], dtype=np.int64).reshape(-1, 2)
        rows, cols = pairs[:, 0], pairs[:, 1]
        if pairs.min() < 0 or pairs.max() >= matrix.num_classes:
            raise ClassRangeError(f"pairs {pairs.tolist()} reach outside [0, {matrix.num_classes})")
        on_diagonal = rows[rows == cols]
        if on_diagonal.size:
            raise ClassRangeError(f"pair ({on_diagonal[0]}, {on_diagonal[0]}) is on the diagonal")

    target = matrix if in_place else matrix.copy()
    table = target.log_potentials
    if confusions:
        scores = strategy_scores(strategy, [c.value for c in confusions])
        updated = tau * table[rows, cols] + alpha * scores
        if not np.all(np.isfinite(updated)):
            raise NonFiniteError(f"potential update produced non-finite values (alpha={alpha}, tau={tau})")
    if PotentialDecay(decay) is PotentialDecay.GLOBAL:
        table *= tau
    if confusions:
        table[rows, cols] = updated
        table[cols, rows] = updated
    return target


def snapshot(matrix: PotentialMatrix) -> np.ndarray:
    """Linear-domain potentials scaled so the largest off-diagonal entry is 1.

    The diagonal is reported as 0.
    """
    table = matrix.log_potentials
    off_diagonal = ~np.eye(matrix.num_classes, dtype=bool)
    dense = np.exp(table - table[off_diagonal].max())
    dense[~off_diagonal] = 0.0
    return dense


def write_snapshot_csv(matrix: PotentialMatrix, path: Path, class_ids: Optional[Sequence[int]] = None) -> None:
    ids = list(range(matrix.num_classes)) if class_ids is None else [int(c) for c in class_ids]
    frame = pd.DataFrame(snapshot(matrix), columns=[str(c) for c in ids])
    frame.to_csv(path, index=False, float_format="%.6f")


def read_snapshot_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)
