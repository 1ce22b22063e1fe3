"""Task samplers used by the training loop.

Each sampler draws category sets over meta-training classes and learns from
the predictions made on the episode it produced.
"""
import logging
from abc import ABC, abstractmethod

import numpy as np

from tasksampler.fewshot import CategorySet, Episode
from tasksampler.learner import PredictionBatch
from tasksampler.potentials import PotentialMatrix, apply_update, effective_alpha, pair_confusion
from tasksampler.schemas import ExponentRule, PotentialDecay, RunConfig, SamplingStrategy, Strategy
from tasksampler.samplers.pairs import sample_task_gcp
from tasksampler.samplers.weights import ClassWeights, class_weight_update, sample_classes_without_replacement

logger = logging.getLogger(__name__)


class TaskSampler(ABC):
    strategy: SamplingStrategy

    def __init__(self, num_classes: int, k: int):
        if not 2 <= k <= num_classes:
            raise ValueError(f"cannot draw {k}-way tasks from {num_classes} classes")
        self.num_classes = num_classes
        self.k = k
        self.potentials = PotentialMatrix.ones(num_classes)

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> CategorySet:
        """Draw the category set of the next episode."""

    def observe(self, episode: Episode, predictions: PredictionBatch) -> None:
        """Adapt to the learner's predictions on the last episode."""


class UniformTaskSampler(TaskSampler):
    strategy = SamplingStrategy.RANDOM

    def sample(self, rng: np.random.Generator) -> CategorySet:
        return CategorySet(tuple(rng.choice(self.num_classes, size=self.k, replace=False).tolist()))


class ClassTaskSampler(TaskSampler):
    """c-sampling: independent per-class difficulty weights."""

    strategy = SamplingStrategy.C_HARD

    def __init__(self, num_classes: int, k: int, alpha: float, tau: float):
        super().__init__(num_classes, k)
        self.alpha = alpha
        self.tau = tau
        self.weights = ClassWeights.uniform(num_classes)

    def sample(self, rng: np.random.Generator) -> CategorySet:
        return sample_classes_without_replacement(self.weights, self.k, rng)

    def observe(self, episode: Episode, predictions: PredictionBatch) -> None:
        self.weights = class_weight_update(self.weights, episode, predictions, self.alpha, self.tau)


class GreedyPairTaskSampler(TaskSampler):
    """gcp-sampling: greedy draws from adaptive class-pair potentials."""

    def __init__(
        self,
        num_classes: int,
        k: int,
        alpha: float,
        tau: float,
        difficulty: Strategy = Strategy.HARD,
        exponent_rule: ExponentRule = ExponentRule.ALPHA,
        decay: PotentialDecay = PotentialDecay.EPISODE,
    ):
        super().__init__(num_classes, k)
        self.difficulty = Strategy(difficulty)
        self.strategy = SamplingStrategy(f"gcp-{self.difficulty.value}")
        self.alpha = effective_alpha(alpha, k, exponent_rule)
        self.tau = tau
        self.decay = PotentialDecay(decay)

    def sample(self, rng: np.random.Generator) -> CategorySet:
        return sample_task_gcp(self.potentials, self.k, rng)

    def observe(self, episode: Episode, predictions: PredictionBatch) -> None:
        apply_update(
            self.potentials,
            pair_confusion(predictions, episode),
            self.alpha,
            self.tau,
            self.difficulty,
            decay=self.decay,
            in_place=True,
        )


def make_task_sampler(config: RunConfig, num_classes: int) -> TaskSampler:
    strategy = SamplingStrategy(config.strategy)
    if strategy is SamplingStrategy.RANDOM:
        return UniformTaskSampler(num_classes, config.k_way)
    if strategy is SamplingStrategy.C_HARD:
        return ClassTaskSampler(num_classes, config.k_way, config.alpha, config.tau)
    return GreedyPairTaskSampler(
        num_classes,
        config.k_way,
        config.alpha,
        config.tau,
        difficulty=strategy.pair_strategy,
        exponent_rule=config.exponent_rule,
        decay=config.potential_decay,
    )
