"""Kullback-Leibler divergence between label distributions and the quantization objective.

Distributions are plain float64 vectors (rows of 2-D arrays for batches) that
are nonnegative and sum to 1. Natural logarithm throughout, with the standard
convention 0*ln(0/q) = 0. A zero in the reference distribution q at an index
where p is positive is a domain error rather than +inf: callers are expected
to route reference distributions through :func:`smooth` first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, ParameterError

if TYPE_CHECKING:
    from .quantizer import Partition


@dataclass(frozen=True)
class SmoothingConfig:
    """Additive smoothing applied to reference (subset) distributions.

    epsilon: nonnegative constant added to each class count before normalizing.
    """

    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon}")


def _kl_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Elementwise p*ln(p/q) with 0*ln(0/.) := 0; inputs must broadcast."""
    support = p > 0.0
    if np.any(support & (q == 0.0)):
        raise DomainError("unsmoothed zero in reference distribution")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log(p / q)
    return np.where(support, terms, 0.0)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) = sum_c p[c]*ln(p[c]/q[c]), natural log.

    Raises DomainError if q has an unsmoothed zero where p is positive.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ParameterError(f"distribution length mismatch: {p.shape} vs {q.shape}")
    return float(_kl_terms(p, q).sum())

def kl_matrix(point_dists: np.ndarray, subset_dists: np.ndarray) -> np.ndarray:
    """KL of every point distribution against every subset distribution.

    point_dists: (N, C) rows; subset_dists: (M, C) rows. Returns an (N, M)
    array whose [i, m] entry equals kl_divergence(point_dists[i], subset_dists[m]).
    """
    P = np.asarray(point_dists, dtype=np.float64)
    Q = np.asarray(subset_dists, dtype=np.float64)
    if P.ndim != 2 or Q.ndim != 2 or P.shape[1] != Q.shape[1]:
        raise ParameterError(
            f"expected (N, C) and (M, C) distribution arrays, got {P.shape} and {Q.shape}"
        )
    return _kl_terms(P[:, None, :], Q[None, :, :]).sum(axis=2)


def smooth(raw_counts: np.ndarray, config: SmoothingConfig) -> np.ndarray:
    """Turn class counts into a distribution: (count_c + eps) / (total + eps*C).

    With eps = 0 this is the raw empirical frequency; with total = 0 and
    eps > 0 it falls back to the uniform distribution. An all-zero count
    vector with eps = 0 is a domain error.
    """
    counts = np.asarray(raw_counts, dtype=np.float64)
    if counts.ndim != 1:
        raise ParameterError(f"counts must be a vector, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ParameterError("counts must be nonnegative")
    total = counts.sum()
    denom = total + config.epsilon * counts.shape[0]
    if denom <= 0.0:
        raise DomainError("empty subset with no smoothing")
    return (counts + config.epsilon) / denom


def objective(
    point_dists: np.ndarray,
    partition: "Partition",
    subset_dists: np.ndarray,
) -> float:
    """Total KL of each point distribution against its subset's distribution.

    Equals sum over subsets m and members i of S_m of
    kl_divergence(point_dists[i], subset_dists[m]).
    """
    P = np.asarray(point_dists, dtype=np.float64)
    Q = np.asarray(subset_dists, dtype=np.float64)
    assignment = np.asarray(partition.assignment)
    if P.shape[0] != assignment.shape[0]:
        raise ParameterError(
            f"{P.shape[0]} point distributions for {assignment.shape[0]} assigned points"
        )
    return float(_kl_terms(P, Q[assignment]).sum(axis=1).sum())
