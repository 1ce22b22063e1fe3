import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from tasksampler.fewshot import meta_split
from tasksampler.schemas import ClusterSpec, RunConfig
from tasksampler.synthdata import (
    center_distance_stats,
    class_centers,
    confusability_ground_truth,
    generate,
    supercluster_assignment,
    write_superclusters_csv,
)


def test_generation_is_deterministic():
    spec = ClusterSpec(num_classes=10, points_per_class=8, dim=4, num_superclusters=2, seed=11)
    assert np.array_equal(generate(spec).features, generate(spec).features)
    other = generate(spec.model_copy(update={"seed": 12}))
    assert not np.array_equal(generate(spec).features, other.features)


def test_pools_are_rectangular():
    dataset = generate(ClusterSpec(num_classes=7, points_per_class=9, dim=3, num_superclusters=2))
    assert dataset.features.shape == (7, 9, 3)
    assert dataset.class_ids.tolist() == list(range(7))


def test_superclusters_are_tighter_than_the_gaps_between_them():
    within, across = center_distance_stats(ClusterSpec(num_classes=20, num_superclusters=4, dim=16))
    assert within < across


def test_vanishing_noise_puts_points_on_their_centers():
    spec = ClusterSpec(num_classes=6, points_per_class=5, dim=3, num_superclusters=2, noise_sigma=1e-12)
    dataset = generate(spec)
    centers = class_centers(spec)
    np.testing.assert_allclose(dataset.features, np.broadcast_to(centers[:, None, :], dataset.features.shape), atol=1e-9)


def test_one_supercluster_per_class():
    spec = ClusterSpec(num_classes=5, num_superclusters=5)
    assert len(set(supercluster_assignment(spec).tolist())) == 5
    truth = confusability_ground_truth(generate(spec), spec)
    assert truth["same_supercluster"].sum() == 0


def test_single_supercluster_makes_every_pair_confusable():
    spec = ClusterSpec(num_classes=5, num_superclusters=1)
    truth = confusability_ground_truth(generate(spec), spec)
    assert len(truth) == 10
    assert truth["same_supercluster"].eq(1).all()


def test_ground_truth_follows_global_ids():
    spec = ClusterSpec(num_classes=12, num_superclusters=3, points_per_class=4, dim=5)
    subset = generate(spec).subset([2, 5, 7, 11])
    truth = confusability_ground_truth(subset, spec)
    assert list(truth.columns) == ["i", "j", "class_i", "class_j", "same_supercluster", "center_distance"]
    assert truth[["i", "j"]].to_numpy().tolist() == [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]
    row = truth[(truth["class_i"] == 5) & (truth["class_j"] == 7)].iloc[0]
    # classes 4..7 form the second block
    assert row["same_supercluster"] == 1
    assert truth[(truth["class_i"] == 2) & (truth["class_j"] == 5)].iloc[0]["same_supercluster"] == 0
    centers = class_centers(spec)
    assert row["center_distance"] == pytest.approx(np.linalg.norm(centers[5] - centers[7]))


def test_cluster_spec_validation():
    with pytest.raises(ValidationError):
        ClusterSpec(within_supercluster_spread=3.0, between_supercluster_spread=2.0)
    with pytest.raises(ValidationError):
        ClusterSpec(num_classes=4, num_superclusters=5)


def test_superclusters_sidecar(tmp_path):
    path = tmp_path / "superclusters.csv"
    write_superclusters_csv(ClusterSpec(num_classes=6, num_superclusters=4), path)
    frame = pd.read_csv(path)
    assert frame["supercluster"].tolist() == [0, 0, 1, 2, 2, 3]


def test_superclusters_are_contiguous_blocks():
    spec = ClusterSpec(num_classes=7, num_superclusters=3)
    assert supercluster_assignment(spec).tolist() == [0, 0, 0, 1, 1, 2, 2]


def test_default_split_keeps_confusable_pairs_on_both_sides():
    config = RunConfig()
    spec = config.cluster_spec()
    train, test = meta_split(generate(spec), config.train_fraction)
    for side in (train, test):
        assert confusability_ground_truth(side, spec)["same_supercluster"].sum() > 0
    assert set(supercluster_assignment(spec)[test.class_ids].tolist()) == {4}
