import numpy as np
import pytest

from tasksampler.fewshot import CategorySet, ClassIndexedDataset, Episode
from tasksampler.schemas import RunConfig


def make_episode(classes, query_features=None, n=1, m=1, dim=2, support_features=None):
    """Episode with class-major rows; features default to zeros."""
    k = len(classes)
    if support_features is None:
        support_features = np.zeros((k * m, dim))
    if query_features is None:
        query_features = np.zeros((k * n, dim))
    support_features = np.asarray(support_features, dtype=np.float64)
    query_features = np.asarray(query_features, dtype=np.float64)
    return Episode(
        categories=CategorySet(tuple(classes)),
        support_features=support_features,
        support_targets=np.repeat(np.arange(k), m),
        support_indices=np.tile(np.arange(m), k),
        query_features=query_features,
        query_targets=np.repeat(np.arange(k), n),
        query_indices=np.tile(np.arange(m, m + n), k),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_dataset(rng):
    centers = rng.normal(0.0, 5.0, size=(6, 1, 4))
    return ClassIndexedDataset(centers + rng.normal(0.0, 1.0, size=(6, 10, 4)))


@pytest.fixture
def tiny_config(tmp_path):
    """Fast run: 12 classes split 9/3, 3-way 2-shot tasks."""
    return RunConfig(
        seed=3,
        iterations=80,
        k_way=3,
        m_shot=2,
        n_query=3,
        num_classes=12,
        points_per_class=20,
        num_superclusters=3,
        dim=6,
        embed_dim=4,
        train_fraction=0.75,
        eval_every=40,
        snapshot_every=20,
        eval_episodes=50,
        out=tmp_path / "run",
    )
