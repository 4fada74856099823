"""k-nearest-neighbor estimation of per-vector class label distributions.

Neighbor search is exact brute force over the training rows (squared
Euclidean distance), which keeps results deterministic and oracle-checkable
at the dataset sizes this library targets. Distance ties are broken by the
lower row index.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class LabeledDataset:
    """N feature vectors with integer class labels.

    features: (N, d) array of finite reals.
    labels: (N,) array of class indices in [0, C).
    class_names: C distinct identifiers, indexed by label value.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        names = tuple(str(name) for name in self.class_names)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ParameterError(f"features must be a nonempty (N, d) matrix, got {features.shape}")
        if not np.all(np.isfinite(features)):
            raise ParameterError("features contain NaN or Inf entries")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ParameterError(
                f"labels must be a length-{features.shape[0]} vector, got shape {labels.shape}"
            )
        if len(names) < 1 or len(set(names)) != len(names):
            raise ParameterError("class_names must be nonempty and distinct")
        if labels.min() < 0 or labels.max() >= len(names):
            raise ParameterError(f"labels must lie in [0, {len(names)})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class KnnConfig:
    """Neighbor count and whether a training row may count as its own neighbor."""

    k: int = 10
    include_self: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")

    def clipped(self, n_points: int) -> "KnnConfig":
        """Copy with k reduced to the largest legal value for n_points rows."""
        bound = n_points if self.include_self else n_points - 1
        if bound < 1:
            raise ParameterError(f"no legal k for {n_points} points with include_self={self.include_self}")
        return replace(self, k=min(self.k, bound))


def _smallest_k(dists: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries, ordered by (value, index) ascending."""
    n = dists.shape[0]
    if k >= n:
        return np.lexsort((np.arange(n), dists))
    kth = np.partition(dists, k - 1)[k - 1]
    strict = np.flatnonzero(dists < kth)
    strict = strict[np.argsort(dists[strict], kind="stable")]
    ties = np.flatnonzero(dists == kth)
    return np.concatenate([strict, ties[: k - strict.shape[0]]])


def _as_query(dataset: LabeledDataset, query: Sequence[float] | np.ndarray) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (dataset.dim,):
        raise ParameterError(f"query must have dimension {dataset.dim}, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ParameterError("query contains NaN or Inf entries")
    return q


def knn_indices(
    dataset: LabeledDataset,
    query: Sequence[float] | np.ndarray,
    config: KnnConfig,
    exclude_index: Optional[int] = None,
) -> np.ndarray:
    """Row indices of the k nearest dataset rows to query.

    Nearness is squared Euclidean distance; ties go to the lower row index
    and the result is sorted by (distance, index) ascending. exclude_index
    removes one row from the candidate set and is honored only when
    config.include_self is false (its intended use is leave-self-out queries).
    """
    q = _as_query(dataset, query)
    dists = np.sum((dataset.features - q) ** 2, axis=1)
    available = dataset.n
    if not config.include_self and exclude_index is not None:
        if not 0 <= exclude_index < dataset.n:
            raise ParameterError(f"exclude_index {exclude_index} not in [0, {dataset.n})")
        dists = dists.copy()
        dists[exclude_index] = np.inf
        available -= 1
    if config.k > available:
        raise ParameterError(f"k={config.k} exceeds the {available} available neighbor candidates")
    return _smallest_k(dists, config.k)


def estimate_label_distribution(
    dataset: LabeledDataset,
    query: Sequence[float] | np.ndarray,
    config: KnnConfig,
    exclude_index: Optional[int] = None,
) -> np.ndarray:
    """Class label distribution of the query's k nearest neighbors.

    Entry c is the fraction of the k neighbors labeled c; the vector is
    nonnegative and sums to 1.
    """
    neighbors = knn_indices(dataset, query, config, exclude_index)
    counts = np.bincount(dataset.labels[neighbors], minlength=dataset.num_classes)
    return counts / float(config.k)


def estimate_all(dataset: LabeledDataset, config: KnnConfig) -> np.ndarray:
    """Label distribution for every training row, as an (N, C) array.

    Row i equals estimate_label_distribution with query = row i, leaving
    row i out of its own candidates when include_self is false.
    """
    out = np.empty((dataset.n, dataset.num_classes), dtype=np.float64)
    for i in range(dataset.n):
        exclude = None if config.include_self else i
        out[i] = estimate_label_distribution(dataset, dataset.features[i], config, exclude)
    return out
