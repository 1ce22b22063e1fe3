"""Prototypical classifier over a linear embedding, plus a fixed oracle learner.

Both produce a PredictionBatch: one probability row per episode query, with
columns ordered like the episode's category set.
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from tasksampler.errors import DatasetFormatError, NonFiniteError, OracleLookupError, PredictionShapeError
from tasksampler.fewshot import ClassIndexedDataset, Episode

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-12
ROW_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64)
        if probs.ndim != 2:
            raise PredictionShapeError(f"expected a (queries, K) table, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise PredictionShapeError("prediction probabilities must be finite and nonnegative")
        if not np.allclose(probs.sum(axis=1), 1.0, rtol=0, atol=ROW_SUM_TOLERANCE):
            raise PredictionShapeError("every prediction row must sum to 1")
        object.__setattr__(self, "probabilities", probs)

    @property
    def num_queries(self) -> int:
        return self.probabilities.shape[0]

    @property
    def num_classes(self) -> int:
        return self.probabilities.shape[1]


@dataclass(frozen=True, eq=False)
class LinearEmbedding:
    weight: np.ndarray
    learning_rate: float

    def __post_init__(self):
        weight = np.asarray(self.weight, dtype=np.float64)
        if weight.ndim != 2 or weight.shape[0] < 1:
            raise ValueError(f"embedding weight must be an (e, d) matrix with e >= 1, got {weight.shape}")
        if not np.all(np.isfinite(weight)):
            raise NonFiniteError("embedding weight has non-finite entries")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        object.__setattr__(self, "weight", weight)

    @classmethod
    def initialize(
        cls, input_dim: int, embed_dim: int, learning_rate: float, rng: np.random.Generator, scale: float = 1.0
    ) -> "LinearEmbedding":
        weight = rng.normal(0.0, scale / np.sqrt(input_dim), size=(embed_dim, input_dim))
        return cls(weight, learning_rate)


def _check_dims(weight: np.ndarray, episode: Episode) -> None:
    if weight.shape[1] != episode.query_features.shape[1]:
        raise PredictionShapeError(
            f"embedding expects {weight.shape[1]} input features, episode has {episode.query_features.shape[1]}"
        )


def _prototype_logits(weight: np.ndarray, episode: Episode) -> Tuple[np.ndarray, np.ndarray]:
    """Negative squared distances to prototypes and the input-space offsets.

    With a linear map the embedded prototype is W times the input-space class
    mean, so the query/prototype offset can be formed before embedding.
    """
    k = episode.k_way
    means = np.stack([episode.support_features[episode.support_targets == c].mean(axis=0) for c in range(k)])
    offsets = episode.query_features[:, None, :] - means[None, :, :]
    embedded = offsets @ weight.T
    return -np.einsum("qke,qke->qk", embedded, embedded), offsets


def forward(embedding: LinearEmbedding, episode: Episode) -> PredictionBatch:
    _check_dims(embedding.weight, episode)
    logits, _ = _prototype_logits(embedding.weight, episode)
    return PredictionBatch(softmax(logits, axis=1))


def episode_loss(batch: PredictionBatch, episode: Episode) -> float:
    """Mean negative log-likelihood of the true class over the query set."""
    if batch.num_queries != len(episode.query_targets):
        raise PredictionShapeError(f"{batch.num_queries} prediction rows for {len(episode.query_targets)} queries")
    true_probs = batch.probabilities[np.arange(batch.num_queries), episode.query_targets]
    return float(-np.mean(np.log(np.maximum(true_probs, PROBABILITY_FLOOR))))


def loss_and_gradient(weight: np.ndarray, episode: Episode) -> Tuple[float, np.ndarray, PredictionBatch]:
    """Episode loss and its analytic gradient with respect to the embedding weight.

    The loss matches `episode_loss`, including the probability floor. The
    gradient is that of the unfloored loss.

    loss_q = D_qt + log sum_c exp(-D_qc) with D_qc = ||W v_qc||^2, so
    dloss_q/dD_qc = [c = t] - p_qc and dD_qc/dW = 2 W v_qc v_qc^T.
    """
    _check_dims(weight, episode)
    logits, offsets = _prototype_logits(weight, episode)
    num_queries = logits.shape[0]
    log_probs = log_softmax(logits, axis=1)
    probs = np.exp(log_probs)
    rows = np.arange(num_queries)
    loss = float(-np.mean(np.maximum(log_probs[rows, episode.query_targets], np.log(PROBABILITY_FLOOR))))

    coeffs = -probs
    coeffs[rows, episode.query_targets] += 1.0
    second_moment = np.einsum("qk,qki,qkj->ij", coeffs, offsets, offsets) / num_queries
    gradient = 2.0 * weight @ second_moment
    return loss, gradient, PredictionBatch(probs)


def train_step(embedding: LinearEmbedding, episode: Episode) -> Tuple[LinearEmbedding, PredictionBatch, float]:
    """One SGD step on the episode; returns the pre-update predictions."""
    loss, gradient, batch = loss_and_gradient(embedding.weight, episode)
    if not np.isfinite(loss) or not np.all(np.isfinite(gradient)):
        raise NonFiniteError(
            f"non-finite loss or gradient (loss={loss}, learning_rate={embedding.learning_rate})"
        )
    updated = embedding.weight - embedding.learning_rate * gradient
    if not np.all(np.isfinite(updated)):
        raise NonFiniteError(f"embedding weight diverged at learning_rate={embedding.learning_rate}")
    return replace(embedding, weight=updated), batch, loss


def class_prototypes(embedding: LinearEmbedding, dataset: ClassIndexedDataset) -> np.ndarray:
    """Embedded pool mean of every class, shape (num_classes, e)."""
    return dataset.features.mean(axis=1) @ embedding.weight.T


@dataclass(frozen=True, eq=False)
class OracleLearner:
    """Feature-blind learner: table[true, candidate] is the mass put on candidate."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.float64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError(f"oracle table must be square, got shape {table.shape}")
        if np.any(table < 0):
            raise ValueError("oracle table entries must be nonnegative")
        object.__setattr__(self, "table", table)

    @classmethod
    def identity(cls, num_classes: int) -> "OracleLearner":
        return cls(np.eye(num_classes))

    @classmethod
    def uniform(cls, num_classes: int) -> "OracleLearner":
        return cls(np.ones((num_classes, num_classes)))


def oracle_forward(oracle: OracleLearner, episode: Episode) -> PredictionBatch:
    classes = np.asarray(episode.categories.classes)
    if classes.max() >= oracle.table.shape[0] or classes.min() < 0:
        raise OracleLookupError(f"oracle has no rows for classes {classes.tolist()}")
    rows = oracle.table[np.ix_(classes, classes)]
    totals = rows.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise OracleLookupError("oracle assigns no mass inside the episode for some class")
    return PredictionBatch((rows / totals)[episode.query_targets])


def save_weights_csv(embedding: LinearEmbedding, path: Path) -> None:
    """Write the weight matrix with a leading 'rows,cols' shape line."""
    rows, cols = embedding.weight.shape
    np.savetxt(path, embedding.weight, delimiter=",", fmt="%.17g", header=f"{rows},{cols}", comments="")


def load_weights_csv(path: Path, learning_rate: float = 0.0) -> LinearEmbedding:
    with open(path) as fh:
        rows, cols = (int(v) for v in fh.readline().strip().split(","))
    weight = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if weight.shape != (rows, cols):
        raise DatasetFormatError(f"{path}: header shape {(rows, cols)} does not match data {weight.shape}")
    return LinearEmbedding(weight, learning_rate)
