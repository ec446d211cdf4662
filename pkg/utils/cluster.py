import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .bandops import EnhancedBand
from .errors import DegenerateInput

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 300
BACKENDS = ("kmeans", "cmeans")


@dataclass(frozen=True, eq=False)
class Clustering:
    labels: np.ndarray
    centroids: np.ndarray  # ascending
    inertia: float
    iterations: int
    inertia_history: Tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class ClusterSplit:
    """Two disjoint masks covering a segment: the low-centroid and high-centroid pixels."""
    low: np.ndarray
    high: np.ndarray


def _validate(values: np.ndarray, k: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).ravel()
    if k < 1 or values.size < k:
        raise ValueError(f"need at least k={k} >= 1 values, got {values.size}")
    if k > 1 and np.all(values == values[0]):
        raise DegenerateInput("all values identical")
    return values


def _seed_centroids(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new centre drawn with probability proportional to D^2."""
    centres = [values[rng.integers(values.size)]]
    for _ in range(1, k):
        d2 = np.min((values[:, None] - np.array(centres)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total > 0:
            index = rng.choice(values.size, p=d2 / total)
        else:
            index = rng.integers(values.size)
        centres.append(values[index])
    return np.array(centres, dtype=np.float64)


def _canonical(values: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    order = np.argsort(centroids, kind="stable")
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    labels = remap[labels]
    centroids = centroids[order]
    inertia = float(np.sum((values - centroids[labels]) ** 2))
    return labels, centroids, inertia


def kmeans_1d(values: np.ndarray, k: int = 2, seed: int = 0) -> Clustering:
    """
    Lloyd's k-means on scalar values.

    Args:
        values: Samples to cluster
        k: Number of clusters
        seed: Seed for the k-means++ initialisation

    Returns:
        Clustering with centroids sorted ascending and labels permuted to match
    """
    values = _validate(values, k)
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(values, k, rng)

    labels = None
    history = []
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        new_labels = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels

        for j in range(k):
            members = values[labels == j]
            if members.size:
                centroids[j] = members.mean()
            else:
                # empty cluster restarts at the worst-fitted point
                farthest = int(np.argmax(np.abs(values - centroids[labels])))
                centroids[j] = values[farthest]
        history.append(float(np.sum((values - centroids[labels]) ** 2)))

    labels, centroids, inertia = _canonical(values, labels, centroids)
    return Clustering(labels=labels, centroids=centroids, inertia=inertia,
                      iterations=iterations, inertia_history=tuple(history))


def _memberships(values: np.ndarray, centroids: np.ndarray, fuzzifier: float) -> np.ndarray:
    distances = np.abs(values[:, None] - centroids[None, :])
    exact = distances == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        inverse = distances ** (-2.0 / (fuzzifier - 1.0))
        u = inverse / inverse.sum(axis=1, keepdims=True)
    hits = exact.any(axis=1)
    if hits.any():
        u[hits] = exact[hits] / exact[hits].sum(axis=1, keepdims=True)
    return u


def fuzzy_cmeans_1d(
    values: np.ndarray,
    k: int = 2,
    fuzzifier: float = 2.0,
    seed: int = 0,
    tolerance: float = 1e-5
) -> Clustering:
    """Fuzzy c-means on scalar values, hardened by maximum membership."""
    if fuzzifier <= 1:
        raise ValueError(f"fuzzifier must be > 1, got {fuzzifier}")
    values = _validate(values, k)
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(values, k, rng)
    u = _memberships(values, centroids, fuzzifier)

    history = []
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        weights = u ** fuzzifier
        centroids = (weights * values[:, None]).sum(axis=0) / weights.sum(axis=0)
        updated = _memberships(values, centroids, fuzzifier)
        change = float(np.max(np.abs(updated - u)))
        u = updated
        history.append(float(np.sum((u ** fuzzifier) * (values[:, None] - centroids[None, :]) ** 2)))
        if change < tolerance:
            break

    labels, centroids, inertia = _canonical(values, np.argmax(u, axis=1), centroids)
    return Clustering(labels=labels, centroids=centroids, inertia=inertia,
                      iterations=iterations, inertia_history=tuple(history))


def cluster_segment(
    enhanced: EnhancedBand,
    segment: np.ndarray,
    backend: str = "kmeans",
    seed: int = 0,
    fuzzifier: float = 2.0
) -> Optional[ClusterSplit]:
    """
    Split a segment's enhanced values into two groups.

    Returns None (uniform segment) when the values are constant or the two
    centroids sit closer than a quarter of the pooled within-cluster spread.
    """
    segment = np.asarray(segment, dtype=bool)
    if not segment.any():
        raise ValueError("segment is empty")
    if backend not in BACKENDS:
        raise ValueError(f"unknown cluster backend: {backend}")

    values = enhanced.data[segment]
    if values.size <= 2:
        return None
    try:
        if backend == "kmeans":
            result = kmeans_1d(values, 2, seed)
        else:
            result = fuzzy_cmeans_1d(values, 2, fuzzifier, seed)
    except DegenerateInput:
        return None

    pooled_std = np.sqrt(result.inertia / (values.size - 2))
    if result.centroids[1] - result.centroids[0] < 0.25 * pooled_std:
        logger.debug(f"Segment {enhanced.segment_id}: centroids too close, treated as uniform")
        return None

    low = np.zeros_like(segment)
    low[segment] = result.labels == 0
    return ClusterSplit(low=low, high=segment & ~low)
