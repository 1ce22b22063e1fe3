"""Synthetic Gaussian class clusters grouped into superclusters.

Classes sharing a supercluster sit close together, so hard class pairs
exist by construction and can be read back as ground truth.
"""
import logging
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from tasksampler.fewshot import ClassIndexedDataset
from tasksampler.schemas import ClusterSpec

logger = logging.getLogger(__name__)


def supercluster_assignment(spec: ClusterSpec) -> np.ndarray:
    """Contiguous blocks: class c belongs to supercluster floor(c * S / C).

    Block sizes differ by at most one. Under the prefix meta split the
    held-out classes share the last superclusters, so meta-test tasks hold
    confusable pairs.
    """
    return np.arange(spec.num_classes) * spec.num_superclusters // spec.num_classes


def _draw_centers(spec: ClusterSpec, rng: np.random.Generator) -> np.ndarray:
    super_centers = rng.normal(0.0, spec.between_supercluster_spread, size=(spec.num_superclusters, spec.dim))
    offsets = rng.normal(0.0, spec.within_supercluster_spread, size=(spec.num_classes, spec.dim))
    return super_centers[supercluster_assignment(spec)] + offsets


def class_centers(spec: ClusterSpec) -> np.ndarray:
    return _draw_centers(spec, np.random.default_rng(spec.seed))


def generate(spec: ClusterSpec) -> ClassIndexedDataset:
    rng = np.random.default_rng(spec.seed)
    centers = _draw_centers(spec, rng)
    noise = rng.normal(0.0, spec.noise_sigma, size=(spec.num_classes, spec.points_per_class, spec.dim))
    logger.debug("generated %d classes x %d points in %d dims", spec.num_classes, spec.points_per_class, spec.dim)
    return ClassIndexedDataset(centers[:, None, :] + noise)


def confusability_ground_truth(dataset: ClassIndexedDataset, spec: ClusterSpec) -> pd.DataFrame:
    """One row per pair of the dataset's classes (local indices i < j).

    Columns: i, j, class_i, class_j (global ids), same_supercluster (0/1),
    center_distance.
    """
    ids = dataset.class_ids
    if ids.max() >= spec.num_classes:
        raise ValueError("dataset classes do not come from this spec")
    centers = class_centers(spec)[ids]
    groups = supercluster_assignment(spec)[ids]
    distances = squareform(pdist(centers))
    rows, cols = np.triu_indices(len(ids), k=1)
    return pd.DataFrame(
        {
            "i": rows,
            "j": cols,
            "class_i": ids[rows],
            "class_j": ids[cols],
            "same_supercluster": (groups[rows] == groups[cols]).astype(int),
            "center_distance": distances[rows, cols],
        }
    )


def center_distance_stats(spec: ClusterSpec) -> Tuple[float, float]:
    """Mean center distance within superclusters and across them."""
    centers = class_centers(spec)
    groups = supercluster_assignment(spec)
    distances = squareform(pdist(centers))
    rows, cols = np.triu_indices(spec.num_classes, k=1)
    same = groups[rows] == groups[cols]
    within = distances[rows, cols][same]
    across = distances[rows, cols][~same]
    return (
        float(within.mean()) if within.size else float("nan"),
        float(across.mean()) if across.size else float("nan"),
    )


def write_superclusters_csv(spec: ClusterSpec, path: Path) -> None:
    pd.DataFrame({"class_id": np.arange(spec.num_classes), "supercluster": supercluster_assignment(spec)}).to_csv(
        path, index=False
    )
