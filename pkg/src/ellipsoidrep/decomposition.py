"""Seeded k-means decomposition of a cloud into compact partitions.

Initialization is k-means++ driven by a hand-rolled splitmix64 generator so
runs are bit-reproducible for a given seed on every platform, independent of
numpy's RNG evolution.  Lloyd iterations stop when assignments stabilize or
after 100 rounds; empty clusters are repaired by donating the point farthest
from its current centroid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .geometry import as_points

__all__ = ["SplitMix64", "PartitionAssignment", "kmeans_partition", "partition_points"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
MAX_ITERS = 100


class SplitMix64:
    """Minimal splitmix64 stream; next_float() is uniform in [0, 1)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53


@dataclass(frozen=True)
class PartitionAssignment:
    """Cluster labels in [0, n_partitions) plus the final centroids."""

    labels: np.ndarray     # (N,) int64
    centroids: np.ndarray  # (k, 3)
    n_partitions: int


def _sq_dist_matrix(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - centroids[None, :, :]
    return (diff * diff).sum(axis=2)


def _plusplus_init(pts: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    n = len(pts)
    centroids = np.empty((k, 3))
    chosen = np.zeros(n, dtype=bool)

    first = min(int(rng.next_float() * n), n - 1)
    centroids[0] = pts[first]
    chosen[first] = True
    diff = pts - pts[first]
    d2 = (diff * diff).sum(axis=1)

    for j in range(1, k):
        total = float(d2.sum())
        idx = -1
        if total > 0.0:
            r = rng.next_float() * total
            cum = np.cumsum(d2)
            idx = min(int(np.searchsorted(cum, r, side="right")), n - 1)
        if idx < 0 or chosen[idx]:
            # duplicate-heavy cloud: fall back to the lowest unchosen index
            idx = int(np.flatnonzero(~chosen)[0])
        centroids[j] = pts[idx]
        chosen[idx] = True
        diff = pts - pts[idx]
        d2 = np.minimum(d2, (diff * diff).sum(axis=1))
    return centroids


def kmeans_partition(points, k: int, seed: int = 0) -> PartitionAssignment:
    """Partition a cloud into k non-empty clusters, deterministically per seed."""
    pts = as_points(points)
    n = len(pts)
    if k < 1:
        raise ValueError("partition count must be positive")
    if k > n:
        raise ValueError(f"cannot make {k} partitions from {n} points")

    centroids = _plusplus_init(pts, k, seed)
    labels = np.full(n, -1, dtype=np.int64)
    rows = np.arange(n)
    prev_obj = np.inf

    for _ in range(MAX_ITERS):
        d2 = _sq_dist_matrix(pts, centroids)
        new = d2.argmin(axis=1).astype(np.int64)

        counts = np.bincount(new, minlength=k)
        while (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            # only points whose cluster keeps >= 1 member may move
            movable = counts[new] >= 2
            dist_own = np.where(movable, d2[rows, new], -np.inf)
            p = int(np.argmax(dist_own))
            counts[new[p]] -= 1
            new[p] = empty
            counts[empty] += 1
            centroids[empty] = pts[p]
            diff = pts - pts[p]
            d2[:, empty] = (diff * diff).sum(axis=1)

        obj = float(d2[rows, new].sum())
        assert obj <= prev_obj * (1.0 + 1e-12) + 1e-12, "k-means objective increased"
        prev_obj = obj

        if np.array_equal(new, labels):
            break
        labels = new
        sums_x = np.bincount(labels, weights=pts[:, 0], minlength=k)
        sums_y = np.bincount(labels, weights=pts[:, 1], minlength=k)
        sums_z = np.bincount(labels, weights=pts[:, 2], minlength=k)
        centroids = np.stack([sums_x, sums_y, sums_z], axis=1) / counts[:, None]

    return PartitionAssignment(labels=labels, centroids=centroids, n_partitions=k)


def partition_points(points, assignment: PartitionAssignment) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split a cloud by assignment, keeping original point order per partition.

    Returns one ``(sub_points, original_indices)`` pair per partition.
    """
    pts = as_points(points)
    if len(assignment.labels) != len(pts):
        raise ValueError("assignment does not match point count")
    out = []
    for j in range(assignment.n_partitions):
        idx = np.flatnonzero(assignment.labels == j)
        out.append((pts[idx], idx))
    return out
