"""Back-projection of per-pixel labels onto the cloud, and the metrics
built on it.

Rules: a point mapped by several pixels takes the argmax of its mean pixel
score (hard labels count as one-hot scores, argmax ties go to the lowest
class id); a point never mapped copies the label of its nearest mapped
neighbor (Euclidean, ties to the lowest point index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .geometry import as_points
from .representation import (
    HierarchicalRepresentation,
    deepest_mapped_level,
    usage_mask,
)

__all__ = [
    "SegmentationResult",
    "deepest_mapped_nodes",
    "backproject_labels",
    "point_usage_rate",
    "instance_miou",
    "max_segmentation_iou",
]


@dataclass
class SegmentationResult:
    """Per-point labels; ``mapped`` is False where the label was filled from
    the nearest mapped neighbor instead of pixels."""

    labels: np.ndarray  # (N,) int64
    mapped: np.ndarray  # (N,) bool


def deepest_mapped_nodes(rep: HierarchicalRepresentation) -> List:
    """Nodes carrying maps at the deepest mapped level, in node order."""
    deepest = deepest_mapped_level(rep)
    return [nd for nd in rep.nodes if nd.level == deepest and nd.map is not None]


def backproject_labels(rep: HierarchicalRepresentation, pixel_labels: Sequence,
                       points, n_classes: Optional[int] = None) -> SegmentationResult:
    """Fuse per-pixel labels from the deepest maps into per-point labels.

    ``pixel_labels`` holds one array per deepest-level node (in node order):
    either (m, m) integer class ids or (m, m, K) float class scores.
    """
    pts = as_points(points)
    if len(pts) != rep.n_points:
        raise ValueError("points do not match the represented cloud")
    nodes = deepest_mapped_nodes(rep)
    if len(pixel_labels) != len(nodes):
        raise ValueError(f"expected {len(nodes)} pixel label maps, got {len(pixel_labels)}")

    arrays = []
    k = n_classes
    for nd, pl in zip(nodes, pixel_labels):
        a = np.asarray(pl)
        m = nd.map.m
        if a.ndim == 2:
            if a.shape != (m, m):
                raise ValueError(f"pixel label map shape {a.shape} does not match ({m}, {m})")
            if k is None or a.max() + 1 > k:
                k = max(k or 0, int(a.max()) + 1)
        elif a.ndim == 3:
            if a.shape[:2] != (m, m):
                raise ValueError(f"pixel score map shape {a.shape} does not match ({m}, {m})")
            if k is None:
                k = a.shape[2]
            elif a.shape[2] != k:
                raise ValueError("pixel score maps disagree on class count")
        else:
            raise ValueError("pixel labels must be (m, m) ids or (m, m, K) scores")
        arrays.append(a)
    if k is None or k < 1:
        raise ValueError("cannot infer class count")

    n = rep.n_points
    scores = np.zeros((n, k))
    counts = np.zeros(n)
    for nd, a in zip(nodes, arrays):
        pi = nd.map.point_index.ravel()
        if a.ndim == 2:
            np.add.at(scores, (pi, a.ravel().astype(np.int64)), 1.0)
        else:
            np.add.at(scores, pi, a.reshape(-1, k).astype(np.float64))
        np.add.at(counts, pi, 1.0)

    mapped = counts > 0
    labels = np.zeros(n, dtype=np.int64)
    mean = scores[mapped] / counts[mapped, None]
    labels[mapped] = mean.argmax(axis=1)  # ties -> lowest class id

    if not mapped.all():
        if not mapped.any():
            raise ValueError("no mapped points to fill from")
        mapped_idx = np.flatnonzero(mapped)
        mp = pts[mapped_idx]
        for i in np.flatnonzero(~mapped):
            d2 = ((mp[:, 0] - pts[i, 0]) ** 2
                  + (mp[:, 1] - pts[i, 1]) ** 2
                  + (mp[:, 2] - pts[i, 2]) ** 2)
            # first minimum = lowest original index (mapped_idx is ascending)
            labels[i] = labels[mapped_idx[int(np.argmin(d2))]]

    return SegmentationResult(labels=labels, mapped=mapped)


def point_usage_rate(rep: HierarchicalRepresentation) -> float:
    """Fraction of points backing at least one deepest-level pixel."""
    return float(usage_mask(rep).mean())


def instance_miou(pred, gt, part_classes) -> float:
    """Mean IoU over a fixed list of part classes for one object.

    A class absent from both prediction and ground truth scores 1.0, per the
    usual part-segmentation convention.
    """
    p = np.asarray(pred)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise ValueError("prediction and ground truth lengths differ")
    ious = []
    for c in part_classes:
        pc = p == c
        gc = g == c
        union = int(np.logical_or(pc, gc).sum())
        if union == 0:
            ious.append(1.0)
        else:
            ious.append(float(np.logical_and(pc, gc).sum()) / union)
    if not ious:
        raise ValueError("no part classes given")
    return float(np.mean(ious))


def max_segmentation_iou(rep: HierarchicalRepresentation, points, gt_labels,
                         part_classes=None) -> float:
    """Upper bound on segmentation quality through this representation.

    Paints every pixel with its point's ground-truth label, back-projects,
    and scores instance mIoU of the result: the representation's resolution
    and coverage are then the only error sources.
    """
    pts = as_points(points)
    gt = np.asarray(gt_labels)
    if gt.shape != (len(pts),):
        raise ValueError("ground-truth labels do not match point count")
    if gt.min() < 0:
        raise ValueError("labels must be non-negative")
    nodes = deepest_mapped_nodes(rep)
    pixel_gt = [gt[nd.map.point_index] for nd in nodes]
    res = backproject_labels(rep, pixel_gt, pts, n_classes=int(gt.max()) + 1)
    if part_classes is None:
        part_classes = np.unique(gt)
    return instance_miou(res.labels, gt, part_classes)
