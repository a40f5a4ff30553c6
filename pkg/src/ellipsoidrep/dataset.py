"""Batch metrics over dataset manifests.

Objects are processed in a worker pool (size from ELLIPSOID_THREADS unless
given explicitly) and merged back in manifest order, so results do not
depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .dataio import DatasetManifest, load_entry
from .representation import RepresentationConfig, represent_hierarchical, resolve_workers
from .segmentation import max_segmentation_iou, point_usage_rate

__all__ = ["MetricsRow", "dataset_metrics"]


@dataclass(frozen=True)
class MetricsRow:
    """Suite-level means for one configuration; ``max_seg_iou`` is NaN when
    no object carries labels."""

    config: RepresentationConfig
    point_usage_rate: float
    max_seg_iou: float
    n_objects: int
    n_labeled: int


def _entry_metrics(manifest: DatasetManifest, entry_index: int,
                   configs: Sequence[RepresentationConfig]):
    entry = manifest.entries[entry_index]
    pts, labels = load_entry(entry)
    parts = manifest.categories[entry.category]
    out = []
    for cfg in configs:
        rep = represent_hierarchical(pts, cfg)
        usage = point_usage_rate(rep)
        iou = math.nan
        if labels is not None:
            iou = max_segmentation_iou(rep, pts, labels, part_classes=parts)
        out.append((usage, iou))
    return out


def dataset_metrics(manifest: DatasetManifest,
                    configs: Sequence[RepresentationConfig],
                    workers: Optional[int] = None) -> List[MetricsRow]:
    """Mean point usage and max segmentation IoU per configuration."""
    if not configs:
        raise ValueError("no configurations given")
    n_workers = resolve_workers(workers)
    indices = range(len(manifest.entries))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            per_entry = list(pool.map(
                lambda i: _entry_metrics(manifest, i, configs), indices))
    else:
        per_entry = [_entry_metrics(manifest, i, configs) for i in indices]

    rows = []
    for j, cfg in enumerate(configs):
        usages = np.array([per_entry[i][j][0] for i in indices])
        ious = np.array([per_entry[i][j][1] for i in indices])
        labeled = ~np.isnan(ious)
        rows.append(MetricsRow(
            config=cfg,
            point_usage_rate=float(usages.mean()),
            max_seg_iou=float(ious[labeled].mean()) if labeled.any() else math.nan,
            n_objects=len(manifest.entries),
            n_labeled=int(labeled.sum()),
        ))
    return rows
