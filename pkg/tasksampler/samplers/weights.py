"""Instance- and class-level adaptive selection weights."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from tasksampler.errors import ClassRangeError, PredictionShapeError, WeightError
from tasksampler.fewshot import CategorySet, Episode
from tasksampler.learner import PredictionBatch
from tasksampler.utils import categorical_from_log

logger = logging.getLogger(__name__)


def _as_weight_vector(weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1:
        raise WeightError(f"weights must be a vector, got shape {weights.shape}")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise WeightError("weights must be finite and nonnegative")
    return weights


@dataclass(frozen=True, eq=False)
class InstanceWeights:
    weights: np.ndarray

    def __post_init__(self):
        weights = _as_weight_vector(self.weights)
        if not np.any(weights > 0):
            raise WeightError("instance weights are all zero")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, size: int) -> "InstanceWeights":
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class ClassWeights:
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_weight_vector(self.weights))

    @classmethod
    def uniform(cls, num_classes: int) -> "ClassWeights":
        return cls(np.ones(num_classes))

    @property
    def num_classes(self) -> int:
        return len(self.weights)

    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()


def _discounted_log(weights: np.ndarray, tau: float) -> np.ndarray:
    """tau * log w, keeping zero weights at -inf (also when tau is 0)."""
    log_w = np.full(weights.shape, -np.inf)
    positive = weights > 0
    log_w[positive] = tau * np.log(weights[positive])
    return log_w


def instance_weight_update(
    weights: InstanceWeights, correct_prob, alpha: float, tau: float
) -> InstanceWeights:
    """w(i) <- w(i)^tau * exp(alpha * (1 - p(y_i | x_i))), renormalized to sum 1."""
    correct_prob = np.asarray(correct_prob, dtype=np.float64)
    if correct_prob.shape != weights.weights.shape:
        raise WeightError(f"{len(correct_prob)} probabilities for {len(weights.weights)} instances")
    if np.any((correct_prob < 0) | (correct_prob > 1)):
        raise ValueError("correct-class probabilities must lie in [0, 1]")
    log_w = _discounted_log(weights.weights, tau) + alpha * (1.0 - correct_prob)
    return InstanceWeights(np.exp(log_w - logsumexp(log_w)))


def class_difficulty(predictions: PredictionBatch, episode: Episode) -> np.ndarray:
    """Per-episode-class score: mass wrongly put on c, plus mass missed on c, over N*K queries."""
    probs = predictions.probabilities
    k = episode.k_way
    if probs.shape[1] != k:
        raise PredictionShapeError(f"prediction rows have {probs.shape[1]} entries for a {k}-way episode")
    if probs.shape[0] != episode.n_query * k:
        raise PredictionShapeError(f"{probs.shape[0]} prediction rows for {episode.n_query * k} queries")
    is_true = np.eye(k, dtype=bool)[episode.query_targets]
    per_query = np.where(is_true, 1.0 - probs, probs)
    return per_query.sum(axis=0) / probs.shape[0]


def class_weight_update(
    weights: ClassWeights, episode: Episode, predictions: PredictionBatch, alpha: float, tau: float
) -> ClassWeights:
    """w(c) <- w(c)^tau * exp(alpha * score(c)) for episode classes; others keep their weight."""
    classes = np.asarray(episode.categories.classes)
    if classes.min() < 0 or classes.max() >= weights.num_classes:
        raise ClassRangeError(f"episode classes {classes.tolist()} outside [0, {weights.num_classes})")
    scores = class_difficulty(predictions, episode)
    updated = weights.weights.copy()
    updated[classes] = np.exp(_discounted_log(weights.weights[classes], tau) + alpha * scores)
    return ClassWeights(updated)


def sample_classes_without_replacement(weights: ClassWeights, k: int, rng: np.random.Generator) -> CategorySet:
    """Draw k distinct classes one at a time, each proportional to the remaining weights."""
    positive = int(np.count_nonzero(weights.weights > 0))
    if k < 1 or k > positive:
        raise WeightError(f"cannot draw {k} classes from {positive} positive weights")
    log_w = np.full(weights.num_classes, -np.inf)
    nonzero = weights.weights > 0
    log_w[nonzero] = np.log(weights.weights[nonzero])
    chosen = []
    for _ in range(k):
        c = categorical_from_log(log_w, rng)
        chosen.append(c)
        log_w[c] = -np.inf
    return CategorySet(tuple(chosen))
