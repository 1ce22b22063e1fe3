"""Episode data model and K-way-M-shot episode construction."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from tasksampler.errors import ClassRangeError, DatasetFormatError, PoolExhaustedError, SplitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CategorySet:
    """Ordered draw of distinct classes; equality ignores the order."""

    classes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(int(c) for c in self.classes))
        if not self.classes:
            raise ValueError("category set is empty")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError(f"duplicate classes in category set {self.classes}")

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.classes))

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CategorySet):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


@dataclass(frozen=True, eq=False)
class LabeledPoint:
    features: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class ClassIndexedDataset:
    """Rectangular per-class point pools.

    `features` has shape (num_classes, L, d). Episodes address classes by
    their local index; `class_ids` maps local indices to the global ids the
    dataset was generated with, so splits stay traceable.
    """

    features: np.ndarray
    class_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 3:
            raise DatasetFormatError(f"expected (classes, L, d) features, got shape {features.shape}")
        if not np.all(np.isfinite(features)):
            raise DatasetFormatError("dataset features must be finite")
        object.__setattr__(self, "features", features)
        class_ids = np.arange(features.shape[0]) if self.class_ids is None else np.asarray(self.class_ids, dtype=np.int64)
        if class_ids.shape != (features.shape[0],) or len(np.unique(class_ids)) != len(class_ids):
            raise DatasetFormatError("class_ids must be one distinct id per class pool")
        object.__setattr__(self, "class_ids", class_ids)

    @property
    def num_classes(self) -> int:
        return self.features.shape[0]

    @property
    def pool_size(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[2]

    def subset(self, local_indices: Sequence[int]) -> "ClassIndexedDataset":
        local_indices = np.asarray(local_indices, dtype=np.int64)
        return ClassIndexedDataset(self.features[local_indices], self.class_ids[local_indices])


@dataclass(frozen=True, eq=False)
class Episode:
    """One K-way task.

    Support and query rows are stored with their target position in
    `categories.classes` (0..K-1) and the index of the point inside its
    class pool. Row order is free; only the label histogram is fixed.
    """

    categories: CategorySet
    support_features: np.ndarray
    support_targets: np.ndarray
    support_indices: np.ndarray
    query_features: np.ndarray
    query_targets: np.ndarray
    query_indices: np.ndarray

    def __post_init__(self):
        k = len(self.categories)
        if k < 2:
            raise ValueError("an episode needs at least two classes")
        for name in ("support", "query"):
            targets = getattr(self, f"{name}_targets")
            counts = np.bincount(targets, minlength=k)
            if len(counts) != k or counts.min() != counts.max() or counts[0] == 0:
                raise ValueError(f"{name} set must hold the same positive number of points for each of {k} classes")

    @property
    def k_way(self) -> int:
        return len(self.categories)

    @property
    def m_shot(self) -> int:
        return len(self.support_targets) // self.k_way

    @property
    def n_query(self) -> int:
        return len(self.query_targets) // self.k_way

    @property
    def query_labels(self) -> np.ndarray:
        return np.asarray(self.categories.classes)[self.query_targets]

    def support_points(self) -> List[LabeledPoint]:
        labels = np.asarray(self.categories.classes)[self.support_targets]
        return [LabeledPoint(x, int(y)) for x, y in zip(self.support_features, labels)]

    def query_points(self) -> List[LabeledPoint]:
        return [LabeledPoint(x, int(y)) for x, y in zip(self.query_features, self.query_labels)]


def build_episode(
    dataset: ClassIndexedDataset,
    categories: CategorySet,
    m: int,
    n: int,
    rng: np.random.Generator,
) -> Episode:
    """Sample m support and n query points per class, uniformly and disjointly."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if m + n > dataset.pool_size:
        raise PoolExhaustedError(f"m + n = {m + n} exceeds class pool size {dataset.pool_size}")
    classes = np.asarray(categories.classes)
    if classes.min() < 0 or classes.max() >= dataset.num_classes:
        raise ClassRangeError(f"categories {categories.classes} outside dataset range [0, {dataset.num_classes})")

    picks = np.stack([rng.choice(dataset.pool_size, size=m + n, replace=False) for _ in classes])
    support_idx, query_idx = picks[:, :m], picks[:, m:]
    k = len(classes)
    return Episode(
        categories=categories,
        support_features=dataset.features[classes[:, None], support_idx].reshape(k * m, dataset.dim),
        support_targets=np.repeat(np.arange(k), m),
        support_indices=support_idx.reshape(-1),
        query_features=dataset.features[classes[:, None], query_idx].reshape(k * n, dataset.dim),
        query_targets=np.repeat(np.arange(k), n),
        query_indices=query_idx.reshape(-1),
    )


def meta_split(
    dataset: ClassIndexedDataset,
    train_fraction: float,
    min_classes: int = 2,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[ClassIndexedDataset, ClassIndexedDataset]:
    """Partition classes into disjoint meta-train and meta-test datasets.

    Without an rng the first round(fraction * classes) pools go to training.
    """
    num_train = int(round(dataset.num_classes * train_fraction))
    num_test = dataset.num_classes - num_train
    if min(num_train, num_test) < min_classes:
        raise SplitError(
            f"train_fraction={train_fraction} splits {dataset.num_classes} classes into "
            f"{num_train}/{num_test}; each side needs at least {min_classes}"
        )
    order = np.arange(dataset.num_classes) if rng is None else rng.permutation(dataset.num_classes)
    return dataset.subset(np.sort(order[:num_train])), dataset.subset(np.sort(order[num_train:]))


def save_dataset_csv(dataset: ClassIndexedDataset, path: Path) -> None:
    """Write one row per point: label (global class id), f0..f{d-1}."""
    flat = dataset.features.reshape(-1, dataset.dim)
    frame = pd.DataFrame(flat, columns=[f"f{i}" for i in range(dataset.dim)])
    frame.insert(0, "label", np.repeat(dataset.class_ids, dataset.pool_size))
    frame.to_csv(path, index=False, float_format="%.17g")


def load_dataset_csv(path: Path) -> ClassIndexedDataset:
    frame = pd.read_csv(path)
    if frame.columns[0] != "label":
        raise DatasetFormatError(f"{path}: first column must be 'label'")
    feature_cols = [f"f{i}" for i in range(len(frame.columns) - 1)]
    if list(frame.columns[1:]) != feature_cols or not feature_cols:
        raise DatasetFormatError(f"{path}: feature columns must be f0..f{len(frame.columns) - 2}")
    groups = frame.groupby("label", sort=True)
    sizes = groups.size()
    if sizes.nunique() != 1:
        raise DatasetFormatError(f"{path}: class pools are not rectangular (sizes {sorted(set(sizes))})")
    features = np.stack([group[feature_cols].to_numpy(dtype=np.float64) for _, group in groups])
    return ClassIndexedDataset(features, sizes.index.to_numpy(dtype=np.int64))

