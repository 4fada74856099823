"""Plain Lloyd k-means over feature vectors, the unsupervised baseline quantizer.

Forgy initialization (K distinct rows sampled with a seeded generator),
squared-Euclidean assignment with lowest-index tie-breaks, mean updates, and
farthest-point reseeding of empty clusters. The same determinism and repair
rules as the KL quantizer, so the two are comparable in experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .quantizer import Partition


@dataclass(frozen=True)
class KmeansModel:
    """Fitted centroids plus the fit diagnostics."""

    centroids: np.ndarray
    K: int
    inertia: float
    iterations_run: int
    inertia_trace: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        centroids = np.asarray(self.centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[0] != self.K or self.K < 1:
            raise ParameterError(f"centroids must be ({self.K}, d) with K >= 1, got {centroids.shape}")
        if not np.all(np.isfinite(centroids)):
            raise ParameterError("centroids contain NaN or Inf entries")
        if self.inertia < 0:
            raise ParameterError(f"inertia must be >= 0, got {self.inertia}")
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "inertia_trace", tuple(float(v) for v in self.inertia_trace))

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def _nearest(features: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment and the full squared-distance matrix."""
    sq = ((features[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(sq, axis=1), sq


def _reseed_empty_clusters(
    assignment: np.ndarray,
    sq: np.ndarray,
    K: int,
) -> np.ndarray:
    """Move the point farthest from its own centroid into each empty cluster.

    Mirrors the quantizer's repair rule: farthest first, one point per empty
    cluster, lowest point index on ties, donors only from clusters with at
    least two members.
    """
    sizes = np.bincount(assignment, minlength=K)
    empties = np.flatnonzero(sizes == 0)
    if empties.size == 0:
        return assignment
    assignment = assignment.copy()
    own = sq[np.arange(assignment.shape[0]), assignment]
    for target in empties:
        donors = np.flatnonzero(sizes[assignment] >= 2)
        if donors.size == 0:
            raise DomainError("cannot reseed empty clusters: fewer points than clusters")
        best = donors[np.lexsort((donors, -own[donors]))[0]]
        sizes[assignment[best]] -= 1
        assignment[best] = target
        sizes[target] += 1
    return assignment


def kmeans_fit(
    features: np.ndarray,
    K: int,
    seed: int = 0,
    max_iters: int = 100,
) -> tuple[KmeansModel, Partition]:
    """Standard Lloyd iteration; stops at an assignment fixpoint or max_iters.

    The inertia recorded after each iteration (sum of squared distances of
    points to their updated centroids) is non-increasing and is kept on the
    model as inertia_trace.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ParameterError(f"features must be a nonempty (N, d) matrix, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ParameterError("features contain NaN or Inf entries")
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ParameterError(f"K={K} must lie in [1, {n}]")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")

    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(n, size=K, replace=False)].copy()
    assignment: np.ndarray | None = None
    trace: list[float] = []
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        proposed, sq = _nearest(X, centroids)
        repaired = _reseed_empty_clusters(proposed, sq, K)
        for m in range(K):
            centroids[m] = X[repaired == m].mean(axis=0)
        trace.append(float(((X - centroids[repaired]) ** 2).sum()))
        if assignment is not None and np.array_equal(proposed, assignment):
            break
        assignment = repaired
    model = KmeansModel(
        centroids=centroids,
        K=K,
        inertia=trace[-1],
        iterations_run=iterations,
        inertia_trace=tuple(trace),
    )
    return model, Partition(assignment, K)


def kmeans_assign(model: KmeansModel, query: Sequence[float] | np.ndarray) -> int:
    """Index of the centroid nearest to query (squared Euclidean, lowest index on ties)."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (model.dim,):
        raise ParameterError(f"query must have dimension {model.dim}, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ParameterError("query contains NaN or Inf entries")
    return int(np.argmin(np.sum((model.centroids - q) ** 2, axis=1)))
