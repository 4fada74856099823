"""Bag-of-features evaluation harness.

Each item owns a bag of local descriptor vectors. A quantizer maps every
descriptor to a subset index, the item becomes a histogram over the M
subsets, and items are classified by 1-nearest-neighbor on normalized
histograms. A seeded synthetic generator provides desk-scale benchmark data:
one Gaussian descriptor mode per class plus an optional shared background
mode that contributes label-free clutter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .label_model import LabeledDataset

DISTANCES = ("l1", "l2")

DEFAULT_MODE_SEPARATION = 6.0
DEFAULT_BACKGROUND_RATE = 0.7
DEFAULT_BACKGROUND_SPREAD_FACTOR = 25.0


@dataclass(frozen=True)
class FeatureBag:
    """One item's local descriptors, plus its class label when known."""

    item_id: str
    descriptors: np.ndarray
    label: Optional[int] = None

    def __post_init__(self) -> None:
        descriptors = np.asarray(self.descriptors, dtype=np.float64)
        if descriptors.ndim != 2 or descriptors.shape[0] < 1:
            raise ParameterError(
                f"descriptors must be a nonempty (P, d) matrix, got {descriptors.shape}"
            )
        if not np.all(np.isfinite(descriptors)):
            raise ParameterError(f"descriptors of item {self.item_id!r} contain NaN or Inf")
        object.__setattr__(self, "descriptors", descriptors)

    @property
    def size(self) -> int:
        return self.descriptors.shape[0]


@dataclass(frozen=True)
class BofHistogram:
    """Counts of an item's descriptors per quantization subset."""

    counts: np.ndarray
    normalized: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        normalized = np.asarray(self.normalized, dtype=np.float64)
        if counts.ndim != 1 or counts.shape != normalized.shape:
            raise ParameterError("counts and normalized must be vectors of equal length")
        if np.any(counts < 0) or counts.sum() < 1:
            raise ParameterError("counts must be nonnegative with a positive total")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "normalized", normalized)

    @property
    def M(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class EvalReport:
    """Classification outcome of one quantizer on one train/test split."""

    per_class_accuracy: np.ndarray
    overall_accuracy: float
    confusion: np.ndarray
    quantizer_tag: str

    def __post_init__(self) -> None:
        confusion = np.asarray(self.confusion, dtype=np.int64)
        per_class = np.asarray(self.per_class_accuracy, dtype=np.float64)
        if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
            raise ParameterError(f"confusion must be square, got {confusion.shape}")
        if per_class.shape != (confusion.shape[0],):
            raise ParameterError("per_class_accuracy length must match confusion size")
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "per_class_accuracy", per_class)


def build_histogram(
    bag: FeatureBag,
    quantize_fn: Callable[[np.ndarray], int],
    M: int,
) -> BofHistogram:
    """Tally quantize_fn over the bag's descriptors into an M-bin histogram."""
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    codes = np.fromiter(
        (quantize_fn(descriptor) for descriptor in bag.descriptors),
        dtype=np.int64,
        count=bag.size,
    )
    if codes.min() < 0 or codes.max() >= M:
        raise ParameterError(f"quantize_fn produced an index outside [0, {M})")
    counts = np.bincount(codes, minlength=M)
    return BofHistogram(counts=counts, normalized=counts / bag.size)


def classify_1nn(
    train_histograms: Sequence[tuple[BofHistogram, int]],
    query: BofHistogram,
    distance: str = "l1",
) -> int:
    """Label of the nearest training histogram under L1 or L2 distance.

    Distances are taken between normalized histograms; ties go to the lowest
    training index.
    """
    if distance not in DISTANCES:
        raise ParameterError(f"distance must be one of {DISTANCES}, got {distance!r}")
    if not train_histograms:
        raise ParameterError("at least one training histogram is required")
    train = np.stack([h.normalized for h, _ in train_histograms])
    if train.shape[1] != query.M:
        raise ParameterError(
            f"histogram length mismatch: train has {train.shape[1]} bins, query has {query.M}"
        )
    diff = train - query.normalized
    if distance == "l1":
        dists = np.abs(diff).sum(axis=1)
    else:
        dists = np.sqrt((diff**2).sum(axis=1))
    return train_histograms[int(np.argmin(dists))][1]


def evaluate(
    train_bags: Sequence[FeatureBag],
    test_bags: Sequence[FeatureBag],
    quantizer_tag: str,
    quantize_fn: Callable[[np.ndarray], int],
    M: int,
    distance: str = "l1",
) -> EvalReport:
    """Histogram every bag, 1-NN classify the test bags, tally the confusion.

    Confusion rows are true classes, columns predictions; overall accuracy is
    the trace over the total count.
    """
    if not train_bags or not test_bags:
        raise ParameterError("train and test bag sets must both be nonempty")
    for bag in (*train_bags, *test_bags):
        if bag.label is None:
            raise ParameterError(f"item {bag.item_id!r} has no label")
    num_classes = max(bag.label for bag in (*train_bags, *test_bags)) + 1
    train_histograms = [(build_histogram(bag, quantize_fn, M), bag.label) for bag in train_bags]
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    for bag in test_bags:
        predicted = classify_1nn(train_histograms, build_histogram(bag, quantize_fn, M), distance)
        confusion[bag.label, predicted] += 1
    row_totals = confusion.sum(axis=1)
    per_class = np.divide(
        np.diag(confusion),
        row_totals,
        out=np.zeros(num_classes, dtype=np.float64),
        where=row_totals > 0,
    )
    overall = float(np.trace(confusion) / confusion.sum())
    return EvalReport(
        per_class_accuracy=per_class,
        overall_accuracy=overall,
        confusion=confusion,
        quantizer_tag=quantizer_tag,
    )


def class_mode_layout(
    num_classes: int,
    dim: int,
    separation: float = DEFAULT_MODE_SEPARATION,
) -> tuple[np.ndarray, np.ndarray]:
    """Descriptor-mode centers per class plus the shared background center.

    Classes get the vertices of a regular simplex (pairwise distance =
    separation) whenever num_classes <= dim + 1; otherwise they are spread on
    a circle in the first two dimensions (adjacent distance = separation), or
    evenly along the line for dim = 1. The background center is the centroid
    of the class modes.
    """
    if num_classes < 1 or dim < 1:
        raise ParameterError("num_classes and dim must be >= 1")
    modes = np.zeros((num_classes, dim))
    if num_classes == 1:
        pass
    elif num_classes <= dim + 1:
        centered = np.eye(num_classes) - 1.0 / num_classes
        _, _, vt = np.linalg.svd(centered)
        modes[:, : num_classes - 1] = (centered @ vt[: num_classes - 1].T) * (
            separation / np.sqrt(2.0)
        )
    elif dim >= 2:
        angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
        radius = separation / (2.0 * np.sin(np.pi / num_classes))
        modes[:, 0] = radius * np.cos(angles)
        modes[:, 1] = radius * np.sin(angles)
    else:
        modes[:, 0] = separation * (np.arange(num_classes) - (num_classes - 1) / 2.0)
    return modes, modes.mean(axis=0)


def generate_synthetic(
    seed: int,
    num_classes: int,
    items_per_class: int,
    descriptors_per_item: int,
    dim: int,
    noise: float,
    mode_separation: float = DEFAULT_MODE_SEPARATION,
    background_rate: float = DEFAULT_BACKGROUND_RATE,
    background_spread_factor: float = DEFAULT_BACKGROUND_SPREAD_FACTOR,
) -> tuple[list[FeatureBag], list[FeatureBag], LabeledDataset]:
    """Seeded benchmark data: train and test bags plus the pooled training
    descriptors labeled by their item's class.

    Every class owns one compact Gaussian mode with isotropic spread equal to
    noise. With probability background_rate a descriptor instead comes from
    the shared background mode, whose spread is background_spread_factor
    times wider: broad label-free clutter covering the class structure, which
    is where unsupervised quantizers spend their subsets. noise = 0 with
    background_rate = 0 therefore puts every descriptor exactly on its class
    mode. Bags are generated train split first, then test, class-major, so a
    fixed seed reproduces identical bags.
    """
    if min(num_classes, items_per_class, descriptors_per_item, dim) < 1:
        raise ParameterError("all generator counts must be >= 1")
    if noise < 0:
        raise ParameterError(f"noise must be >= 0, got {noise}")
    if not 0.0 <= background_rate <= 1.0:
        raise ParameterError(f"background_rate must lie in [0, 1], got {background_rate}")
    if background_spread_factor < 0:
        raise ParameterError("background_spread_factor must be >= 0")
    modes, background = class_mode_layout(num_classes, dim, mode_separation)
    rng = np.random.default_rng(seed)
    splits: dict[str, list[FeatureBag]] = {"train": [], "test": []}
    for split, bags in splits.items():
        for c in range(num_classes):
            for item in range(items_per_class):
                from_background = rng.random(descriptors_per_item) < background_rate
                centers = np.where(from_background[:, None], background, modes[c])
                spreads = np.where(
                    from_background[:, None], noise * background_spread_factor, noise
                )
                descriptors = centers + spreads * rng.standard_normal(
                    (descriptors_per_item, dim)
                )
                bags.append(
                    FeatureBag(
                        item_id=f"{split}-c{c}-i{item:03d}",
                        descriptors=descriptors,
                        label=c,
                    )
                )
    train_bags = splits["train"]
    features = np.vstack([bag.descriptors for bag in train_bags])
    labels = np.repeat(
        [bag.label for bag in train_bags], [bag.size for bag in train_bags]
    )
    dataset = LabeledDataset(
        features=features,
        labels=labels,
        class_names=tuple(f"class_{c}" for c in range(num_classes)),
    )
    return train_bags, splits["test"], dataset
