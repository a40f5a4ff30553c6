"""Exact nearest-neighbor lookup with a deterministic lowest-index tie rule.

The index is a scipy KD-tree (median splits on the widest-spread axis).
scipy does not document which of several equidistant neighbors it returns,
so every query asks for the two nearest and, whenever their distances tie,
the winner is re-resolved by an exact squared-distance scan that keeps the
lowest point index.  ``nearest_bruteforce`` is the reference linear scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial import cKDTree

from .geometry import as_points

__all__ = ["NNIndex", "build_index", "nearest", "nearest_batch", "nearest_bruteforce"]


@dataclass
class NNIndex:
    """Immutable spatial index over a fixed cloud; safe to share across threads."""

    points: np.ndarray
    tree: cKDTree


def build_index(points) -> NNIndex:
    pts = as_points(points)
    return NNIndex(points=pts, tree=cKDTree(pts, balanced_tree=True))


def _sq_dists_to(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    return ((points[:, 0] - q[0]) ** 2
            + (points[:, 1] - q[1]) ** 2
            + (points[:, 2] - q[2]) ** 2)


def nearest_batch(index: NNIndex, queries) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest point index and distance for each query row.

    Returns ``(indices, distances)`` of shape (Q,).  Ties on distance go to
    the lowest point index.
    """
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != 3:
        raise ValueError(f"expected queries with shape (Q, 3), got {q.shape}")
    if not np.isfinite(q).all():
        raise ValueError("non-finite input")
    n = len(index.points)
    if n == 1:
        idx = np.zeros(len(q), dtype=np.int64)
    else:
        dd, ii = index.tree.query(q, k=2)
        idx = ii[:, 0].astype(np.int64)
        ties = dd[:, 0] == dd[:, 1]
        if ties.any():
            for row in np.flatnonzero(ties):
                d2 = _sq_dists_to(index.points, q[row])
                idx[row] = int(np.argmin(d2))
    sel = index.points[idx]
    d2 = ((sel[:, 0] - q[:, 0]) ** 2
          + (sel[:, 1] - q[:, 1]) ** 2
          + (sel[:, 2] - q[:, 2]) ** 2)
    return idx, np.sqrt(d2)


def nearest(index: NNIndex, query) -> Tuple[int, float]:
    """Single-query wrapper around :func:`nearest_batch`."""
    idx, dist = nearest_batch(index, np.asarray(query, dtype=np.float64)[None, :])
    return int(idx[0]), float(dist[0])


def nearest_bruteforce(points, query) -> Tuple[int, float]:
    """Reference linear scan; argmin of squared distances, lowest index wins."""
    pts = as_points(points)
    q = np.asarray(query, dtype=np.float64)
    d2 = _sq_dists_to(pts, q)
    i = int(np.argmin(d2))
    return i, float(np.sqrt(d2[i]))
