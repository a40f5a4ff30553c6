"""Ellipsoid-surface feature maps and the hierarchical representation.

A single map shoots an m x m grid of anchors from the fitted ellipsoid
surface into the cloud and fills every pixel with the nearest point, so maps
are dense by construction.  The hierarchical form decomposes the cloud with
k-means and repeats the projection per partition; deeper levels recover the
points a single coarse map misses.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .decomposition import SplitMix64, kmeans_partition, partition_points
from .geometry import (
    ANCHOR_MODES,
    EllipsoidFeature,
    EllipsoidFrame,
    anchor_world,
    as_points,
    circumsphere_frame,
    pca_frame,
    rotation_to_rotvec,
    to_local,
    unit_anchor_grid,
)
from .knn import build_index, nearest_batch

__all__ = [
    "ChannelLayout",
    "LOCAL_LAYOUT",
    "FULL_LAYOUT",
    "FeatureMap",
    "EllipsoidNode",
    "RepresentationConfig",
    "HierarchicalRepresentation",
    "represent_single",
    "represent_hierarchical",
    "usage_mask",
    "deepest_mapped_level",
    "resolve_workers",
]

# (name, width, flag bit) for each channel group, in storage order
_CHANNEL_GROUPS = (
    ("world_position", 3, 1 << 0),
    ("local_position", 3, 1 << 1),
    ("sphere_anchor", 3, 1 << 2),
    ("pixel_coords", 2, 1 << 3),
)


@dataclass(frozen=True)
class ChannelLayout:
    """Which per-pixel channel groups a feature map stores, in fixed order:
    world position (3), local position (3), sphere anchor (3), pixel
    coordinates (2)."""

    world_position: bool = False
    local_position: bool = True
    sphere_anchor: bool = False
    pixel_coords: bool = False

    def __post_init__(self):
        if not (self.world_position or self.local_position
                or self.sphere_anchor or self.pixel_coords):
            raise ValueError("channel layout selects no channels")

    @property
    def n_channels(self) -> int:
        return sum(w for name, w, _ in _CHANNEL_GROUPS if getattr(self, name))

    def flags(self) -> int:
        return sum(b for name, _, b in _CHANNEL_GROUPS if getattr(self, name))

    @classmethod
    def from_flags(cls, flags: int) -> "ChannelLayout":
        known = 0
        for _, _, b in _CHANNEL_GROUPS:
            known |= b
        if flags & ~known or flags == 0:
            raise ValueError(f"invalid channel flags 0x{flags:02x}")
        return cls(**{name: bool(flags & b) for name, _, b in _CHANNEL_GROUPS})


LOCAL_LAYOUT = ChannelLayout()
FULL_LAYOUT = ChannelLayout(world_position=True, local_position=True,
                            sphere_anchor=True, pixel_coords=True)


@dataclass(frozen=True)
class FeatureMap:
    """Dense m x m pixel map; ``data`` is indexed [v, u, channel] and
    ``point_index`` holds the global index of the point behind each pixel."""

    m: int
    layout: ChannelLayout
    data: np.ndarray         # (m, m, C) float64
    point_index: np.ndarray  # (m, m) int64


@dataclass
class EllipsoidNode:
    """One partition in the hierarchy: its fitted frame, 9-value feature,
    global member indices, and (optionally) its feature map."""

    level: int
    parent: Optional[int]    # index into the node list, None for the root
    members: np.ndarray      # (n_members,) int64 global point indices
    frame: EllipsoidFrame
    feature: EllipsoidFeature
    map: Optional[FeatureMap]


@dataclass(frozen=True)
class RepresentationConfig:
    """Hierarchy shape: level count, partitions per decomposition, map
    resolution, channel layout, anchor placement, and the k-means seed."""

    levels: int = 2
    partitions: Union[int, Tuple[int, ...]] = 36
    resolution: int = 32
    layout: ChannelLayout = LOCAL_LAYOUT
    anchor_mode: str = "centered"
    seed: int = 0
    include_root_map: bool = True
    spherical_baseline: bool = False

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if self.anchor_mode not in ANCHOR_MODES:
            raise ValueError(f"unknown anchor mode {self.anchor_mode!r}")
        for k in self.partitions_per_level():
            if k < 1:
                raise ValueError("partition counts must be >= 1")
        if self.spherical_baseline and self.levels != 1:
            raise ValueError("spherical baseline is a single-level representation")

    def partitions_per_level(self) -> Tuple[int, ...]:
        """Partition count for each decomposition step (levels - 1 entries)."""
        n_steps = self.levels - 1
        if isinstance(self.partitions, int):
            return (self.partitions,) * n_steps
        parts = tuple(int(k) for k in self.partitions)
        if len(parts) != n_steps:
            raise ValueError(f"need {n_steps} partition counts, got {len(parts)}")
        return parts


@dataclass
class HierarchicalRepresentation:
    """Node list in breadth-first order (root first) plus the config and the
    source cloud size."""

    nodes: List[EllipsoidNode]
    config: RepresentationConfig
    n_points: int


def _represent_node(pts: np.ndarray, members: np.ndarray, m: int,
                    layout: ChannelLayout, mode: str,
                    frame: Optional[EllipsoidFrame],
                    want_map: bool) -> Tuple[EllipsoidFrame, EllipsoidFeature, Optional[FeatureMap]]:
    if frame is None:
        frame = pca_frame(pts)
    feature = EllipsoidFeature(rotvec=rotation_to_rotvec(frame.rotation),
                               radii=frame.radii, center=frame.center)
    if not want_map:
        return frame, feature, None

    units = unit_anchor_grid(m, mode)
    anchors = anchor_world(frame, units)
    index = build_index(pts)
    flat_idx, _ = nearest_batch(index, anchors.reshape(-1, 3))
    li = flat_idx.reshape(m, m)

    data = np.empty((m, m, layout.n_channels))
    c = 0
    hit = pts[li]
    if layout.world_position:
        data[..., c:c + 3] = hit
        c += 3
    if layout.local_position:
        data[..., c:c + 3] = to_local(frame, hit)
        c += 3
    if layout.sphere_anchor:
        data[..., c:c + 3] = units
        c += 3
    if layout.pixel_coords:
        frac = np.arange(m, dtype=np.float64) / m
        data[..., c] = frac[None, :]
        data[..., c + 1] = frac[:, None]
        c += 2

    fmap = FeatureMap(m=m, layout=layout, data=data,
                      point_index=members[li].astype(np.int64))
    return frame, feature, fmap


def represent_single(points, global_indices=None, m: int = 32,
                     layout: ChannelLayout = LOCAL_LAYOUT,
                     mode: str = "centered",
                     frame: Optional[EllipsoidFrame] = None) -> Tuple[EllipsoidFeature, FeatureMap]:
    """Fit one ellipsoid to a (sub)cloud and fill its m x m feature map.

    ``global_indices`` maps local point positions to indices in the parent
    cloud; by default the cloud is its own parent.  A precomputed ``frame``
    skips the PCA fit (used by the spherical baseline).
    """
    pts = as_points(points)
    if mode not in ANCHOR_MODES:
        raise ValueError(f"unknown anchor mode {mode!r}")
    if m < 1:
        raise ValueError("grid resolution must be positive")
    if global_indices is None:
        gi = np.arange(len(pts), dtype=np.int64)
    else:
        gi = np.asarray(global_indices, dtype=np.int64)
        if gi.shape != (len(pts),):
            raise ValueError("global_indices does not match point count")
    _, feature, fmap = _represent_node(pts, gi, m, layout, mode, frame, True)
    return feature, fmap


def _derive_seed(base: int, salt: int) -> int:
    g = SplitMix64((base & 0xFFFFFFFFFFFFFFFF)
                   ^ (((salt + 1) * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF))
    return g.next_u64()


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, else ELLIPSOID_THREADS, else 1."""
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        return workers
    env = os.environ.get("ELLIPSOID_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("ELLIPSOID_THREADS must be >= 1")
        return n
    return 1


def represent_hierarchical(points, config: RepresentationConfig = RepresentationConfig(),
                           workers: Optional[int] = None) -> HierarchicalRepresentation:
    """Build the full node hierarchy for a cloud.

    Nodes come back in breadth-first order with the root at index 0.  Maps
    are always emitted below the root; the root's own map is controlled by
    ``config.include_root_map`` (and always present for single-level runs).
    Worker threads only parallelize independent per-partition projections,
    so results are identical for any worker count.
    """
    pts = as_points(points)
    n = len(pts)
    n_workers = resolve_workers(workers)

    if config.spherical_baseline:
        root_frame = circumsphere_frame(pts)
    else:
        root_frame = pca_frame(pts)
    root_want_map = config.include_root_map or config.levels == 1
    frame, feature, fmap = _represent_node(
        pts, np.arange(n, dtype=np.int64), config.resolution, config.layout,
        config.anchor_mode, root_frame, root_want_map)
    nodes = [EllipsoidNode(level=0, parent=None,
                           members=np.arange(n, dtype=np.int64),
                           frame=frame, feature=feature, map=fmap)]

    frontier = [0]
    for level, k in enumerate(config.partitions_per_level(), start=1):
        jobs = []  # (parent_index, sub_points, global_members)
        for node_idx in frontier:
            node = nodes[node_idx]
            sub = pts[node.members]
            if len(sub) < k:
                raise ValueError(
                    f"cloud too small for partition count ({len(sub)} points, {k} partitions)")
            seed = config.seed if level == 1 else _derive_seed(config.seed, node_idx)
            assign = kmeans_partition(sub, k, seed)
            for part_pts, local_idx in partition_points(sub, assign):
                jobs.append((node_idx, part_pts, node.members[local_idx]))

        def run(job):
            _, part_pts, members = job
            return _represent_node(part_pts, members, config.resolution,
                                   config.layout, config.anchor_mode, None, True)

        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(run, jobs))
        else:
            results = [run(j) for j in jobs]

        frontier = []
        for (parent_idx, _, members), (frame, feature, fmap) in zip(jobs, results):
            frontier.append(len(nodes))
            nodes.append(EllipsoidNode(level=level, parent=parent_idx,
                                       members=members, frame=frame,
                                       feature=feature, map=fmap))

    return HierarchicalRepresentation(nodes=nodes, config=config, n_points=n)


def deepest_mapped_level(rep: HierarchicalRepresentation) -> int:
    levels = [nd.level for nd in rep.nodes if nd.map is not None]
    if not levels:
        raise ValueError("representation has no feature maps")
    return max(levels)


def usage_mask(rep: HierarchicalRepresentation) -> np.ndarray:
    """Boolean mask over the source cloud: True where a point backs at least
    one pixel at the deepest mapped level."""
    deepest = deepest_mapped_level(rep)
    mask = np.zeros(rep.n_points, dtype=bool)
    for nd in rep.nodes:
        if nd.level == deepest and nd.map is not None:
            mask[nd.map.point_index.ravel()] = True
    return mask
