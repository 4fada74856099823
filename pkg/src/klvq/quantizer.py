"""KL-minimizing vector quantization.

Training vectors are partitioned into M subsets by alternating two steps:
recompute each subset's class label distribution from its members, then
reassign every vector to the subset whose distribution is closest in KL
divergence to the vector's own kNN-estimated label distribution. Unseen
vectors are quantized by the same argmin against the fitted subset
distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergence import SmoothingConfig, _kl_terms, kl_matrix, objective, smooth
from .errors import DomainError, ParameterError
from .label_model import KnnConfig, LabeledDataset, estimate_all, estimate_label_distribution

INIT_MODES = ("random", "kmeans")
UPDATE_MODES = ("paper", "centroid")


@dataclass(frozen=True)
class Partition:
    """Assignment of N points to M disjoint subsets (preimages of each index)."""

    assignment: np.ndarray
    M: int

    def __post_init__(self) -> None:
        assignment = np.asarray(self.assignment, dtype=np.int64)
        if assignment.ndim != 1 or assignment.shape[0] < 1:
            raise ParameterError(f"assignment must be a nonempty vector, got shape {assignment.shape}")
        if self.M < 1:
            raise ParameterError(f"M must be >= 1, got {self.M}")
        if assignment.min() < 0 or assignment.max() >= self.M:
            raise ParameterError(f"assignment indices must lie in [0, {self.M})")
        object.__setattr__(self, "assignment", assignment)

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    def subset_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.M)


@dataclass(frozen=True)
class QuantizerConfig:
    """Everything fit() needs beyond the dataset itself."""

    M: int
    knn: KnnConfig = KnnConfig()
    smoothing: SmoothingConfig = SmoothingConfig()
    max_iters: int = 100
    seed: int = 0
    init: str = "random"
    update_mode: str = "paper"

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ParameterError(f"M must be >= 1, got {self.M}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.seed < 0:
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed}")
        if self.init not in INIT_MODES:
            raise ParameterError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.update_mode not in UPDATE_MODES:
            raise ParameterError(f"update_mode must be one of {UPDATE_MODES}, got {self.update_mode!r}")


@dataclass(frozen=True)
class QuantizerModel:
    """A fitted quantizer: subset distributions plus the training references
    needed to estimate label distributions for new vectors."""

    subset_dists: np.ndarray
    config: QuantizerConfig
    training_features: np.ndarray
    training_labels: np.ndarray
    class_names: tuple[str, ...]
    final_objective: float
    iterations_run: int
    converged: bool
    _training_set: LabeledDataset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        dists = np.asarray(self.subset_dists, dtype=np.float64)
        if dists.ndim != 2 or dists.shape[0] != self.config.M:
            raise ParameterError(f"subset_dists must be ({self.config.M}, C), got {dists.shape}")
        sums = dists.sum(axis=1)
        if np.any(dists < 0) or np.any(np.abs(sums - 1.0) > 1e-9):
            raise ParameterError("subset_dists rows must be distributions summing to 1")
        if self.config.smoothing.epsilon > 0 and np.any(dists <= 0):
            raise ParameterError("smoothed subset_dists must be strictly positive")
        if not np.isfinite(self.final_objective) or self.final_objective < -1e-9:
            raise ParameterError(f"final_objective must be finite and >= -1e-9, got {self.final_objective}")
        training_set = LabeledDataset(self.training_features, self.training_labels, self.class_names)
        object.__setattr__(self, "subset_dists", dists)
        object.__setattr__(self, "training_features", training_set.features)
        object.__setattr__(self, "training_labels", training_set.labels)
        object.__setattr__(self, "class_names", training_set.class_names)
        object.__setattr__(self, "_training_set", training_set)


def update_subset_distributions(
    partition: Partition,
    labels: np.ndarray,
    num_classes: int,
    mode: str,
    point_dists: np.ndarray,
    smoothing: SmoothingConfig,
) -> np.ndarray:
    """Per-subset class label distributions, as an (M, C) array.

    paper mode: smoothed empirical label frequency of each subset's members.
    centroid mode: smoothed mean of the members' point distributions (the KL
    centroid). Empty subsets come out uniform when smoothing is positive.
    """
    if mode not in UPDATE_MODES:
        raise ParameterError(f"mode must be one of {UPDATE_MODES}, got {mode!r}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != partition.n:
        raise ParameterError(f"{labels.shape[0]} labels for {partition.n} assigned points")
    out = np.empty((partition.M, num_classes), dtype=np.float64)
    for m in range(partition.M):
        members = partition.assignment == m
        if mode == "paper":
            weights = np.bincount(labels[members], minlength=num_classes).astype(np.float64)
        else:
            member_dists = np.asarray(point_dists, dtype=np.float64)[members]
            weights = member_dists.mean(axis=0) if member_dists.shape[0] else np.zeros(num_classes)
        out[m] = smooth(weights, smoothing)
    return out


def assign_step(point_dists: np.ndarray, subset_dists: np.ndarray) -> Partition:
    """Assign every point to the subset minimizing KL(point || subset).

    Ties go to the lowest subset index; the result does not depend on any
    previous assignment.
    """
    kls = kl_matrix(point_dists, subset_dists)
    return Partition(np.argmin(kls, axis=1), subset_dists.shape[0])


def _repair_empty_subsets(
    assignment: np.ndarray,
    subset_dists: np.ndarray,
    point_dists: np.ndarray,
) -> np.ndarray:
    """Move the worst-fit points into empty subsets, one point per subset.

    Worst fit = largest KL to the point's currently assigned subset; ties go
    to the lowest point index. Donor points are only taken from subsets with
    at least two members, so no new empty subset can appear.
    """
    M = subset_dists.shape[0]
    sizes = np.bincount(assignment, minlength=M)
    empties = np.flatnonzero(sizes == 0)
    if empties.size == 0:
        return assignment
    assignment = assignment.copy()
    kl_to_own = _kl_terms(point_dists, subset_dists[assignment]).sum(axis=1)
    for target in empties:
        donors = np.flatnonzero(sizes[assignment] >= 2)
        if donors.size == 0:
            raise DomainError("cannot repair empty subsets: fewer points than subsets")
        best = donors[np.lexsort((donors, -kl_to_own[donors]))[0]]
        sizes[assignment[best]] -= 1
        assignment[best] = target
        sizes[target] += 1
    return assignment


def _initial_assignment(
    dataset: LabeledDataset,
    config: QuantizerConfig,
    point_dists: np.ndarray | None = None,
) -> np.ndarray:
    if config.M > dataset.n:
        raise ParameterError(f"M={config.M} exceeds the {dataset.n} available points")
    if config.init == "kmeans":
        from .kmeans import kmeans_fit

        _, partition = kmeans_fit(dataset.features, config.M, config.seed, config.max_iters)
        return partition.assignment
    rng = np.random.default_rng(config.seed)
    assignment = rng.integers(0, config.M, size=dataset.n)
    if np.bincount(assignment, minlength=config.M).min() == 0:
        if point_dists is None:
            point_dists = estimate_all(dataset, config.knn)
        subset_dists = update_subset_distributions(
            Partition(assignment, config.M),
            dataset.labels,
            dataset.num_classes,
            config.update_mode,
            point_dists,
            config.smoothing,
        )
        assignment = _repair_empty_subsets(assignment, subset_dists, point_dists)
    return assignment


def init_partition(n: int, config: QuantizerConfig, dataset: LabeledDataset) -> Partition:
    """Deterministic starting partition for fit(): seeded uniform assignment
    with empty subsets repaired, or the k-means partition of the features."""
    if n != dataset.n:
        raise ParameterError(f"n={n} does not match the dataset's {dataset.n} rows")
    return Partition(_initial_assignment(dataset, config), config.M)


def fit(
    dataset: LabeledDataset,
    config: QuantizerConfig,
) -> tuple[QuantizerModel, Partition, list[float]]:
    """Fit the KL quantizer by alternating distribution and assignment updates.

    Starts from init_partition, stops at the first assignment fixpoint or
    after max_iters. Empty subsets produced by an assignment step are
    repaired before the next update. Returns the fitted model, the final
    partition, and the objective value recorded after each full iteration.
    """
    point_dists = estimate_all(dataset, config.knn)
    assignment = _initial_assignment(dataset, config, point_dists)
    labels = dataset.labels
    subset_dists = np.empty((config.M, dataset.num_classes))
    trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        iterations += 1
        subset_dists = update_subset_distributions(
            Partition(assignment, config.M),
            labels,
            dataset.num_classes,
            config.update_mode,
            point_dists,
            config.smoothing,
        )
        proposed = assign_step(point_dists, subset_dists).assignment
        repaired = _repair_empty_subsets(proposed, subset_dists, point_dists)
        trace.append(objective(point_dists, Partition(repaired, config.M), subset_dists))
        if np.array_equal(proposed, assignment):
            converged = True
            break
        assignment = repaired
    model = QuantizerModel(
        subset_dists=subset_dists,
        config=config,
        training_features=dataset.features,
        training_labels=dataset.labels,
        class_names=dataset.class_names,
        final_objective=trace[-1],
        iterations_run=iterations,
        converged=converged,
    )
    return model, Partition(assignment, config.M), trace


def quantize(model: QuantizerModel, query: Sequence[float] | np.ndarray) -> int:
    """Subset index for a new vector: estimate its label distribution by kNN
    against the training set, then take the KL argmin over subset
    distributions (lowest index on ties)."""
    p = estimate_label_distribution(model._training_set, query, model.config.knn)
    kls = kl_matrix(p[None, :], model.subset_dists)
    return int(np.argmin(kls[0]))
