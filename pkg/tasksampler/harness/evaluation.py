import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from tasksampler.fewshot import ClassIndexedDataset, build_episode
from tasksampler.learner import LinearEmbedding, forward
from tasksampler.potentials import PotentialMatrix
from tasksampler.samplers.tasks import UniformTaskSampler
from tasksampler.utils import mean_ci95

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationResult:
    accuracy_mean: float
    accuracy_ci95: float
    episodes: int


@dataclass(frozen=True)
class RecoveryResult:
    spearman_distance: float
    spearman_same_supercluster: float


def evaluate(
    embedding: LinearEmbedding,
    dataset: ClassIndexedDataset,
    k: int,
    m: int,
    n: int,
    episodes: int,
    rng: np.random.Generator,
) -> EvaluationResult:
    """Mean query accuracy over uniformly sampled k-way episodes."""
    sampler = UniformTaskSampler(dataset.num_classes, k)
    accuracies = np.empty(episodes)
    for e in range(episodes):
        episode = build_episode(dataset, sampler.sample(rng), m, n, rng)
        predicted = forward(embedding, episode).probabilities.argmax(axis=1)
        accuracies[e] = np.mean(predicted == episode.query_targets)
    mean, ci95 = mean_ci95(accuracies)
    return EvaluationResult(mean, ci95, episodes)


def potential_recovery(matrix: PotentialMatrix, truth: pd.DataFrame) -> RecoveryResult:
    """Spearman correlation of learned log potentials with ground-truth confusability.

    `truth` rows must follow the matrix's i < j pair order.
    """
    rows, cols, logs = matrix.upper_triangle()
    if not (np.array_equal(truth["i"].to_numpy(), rows) and np.array_equal(truth["j"].to_numpy(), cols)):
        raise ValueError("ground-truth pairs do not follow the potential matrix pair order")
    with warnings.catch_warnings():
        # constant potentials (no adaptation yet) have no rank correlation
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        by_distance = stats.spearmanr(logs, -truth["center_distance"].to_numpy())[0]
        by_group = stats.spearmanr(logs, truth["same_supercluster"].to_numpy())[0]
    return RecoveryResult(float(by_distance), float(by_group))
