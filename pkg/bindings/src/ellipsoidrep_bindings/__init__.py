"""In-process array bridge to the ellipsoid representation core.

The four ``py_*`` calls take plain numpy arrays plus a config mapping
whose keys mirror the CLI flags, and return numpy buffers bit-identical
to what the core writes through its own interfaces.  Node mappings hand
out the core's arrays directly (no copy) where possible; the 9-value
feature is assembled fresh per node.  The wrapper adds no locking of its
own; the numpy/scipy kernels underneath drop the interpreter lock while
they work, and the wrapped core is thread-safe per its own contracts.
"""

from __future__ import annotations

from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ellipsoidrep.geometry import (
    ANCHOR_MODES,
    EllipsoidFeature,
    EllipsoidFrame,
    rotvec_to_rotation,
)
from ellipsoidrep.representation import (
    ChannelLayout,
    EllipsoidNode,
    FULL_LAYOUT,
    FeatureMap,
    HierarchicalRepresentation,
    LOCAL_LAYOUT,
    RepresentationConfig,
    represent_hierarchical,
)
from ellipsoidrep.segmentation import (
    backproject_labels,
    deepest_mapped_nodes,
    max_segmentation_iou,
    point_usage_rate,
)

__all__ = [
    "py_represent",
    "py_backproject",
    "py_point_usage_rate",
    "py_max_segmentation_iou",
]

__version__ = "0.1.0"

_CHANNEL_CHOICES = {"local": LOCAL_LAYOUT, "full": FULL_LAYOUT}
_CONFIG_KEYS = frozenset((
    "levels", "partitions", "resolution", "channels", "anchor", "seed",
    "no_root_map", "spherical_baseline", "workers",
))


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(
            f"points must be 2-dimensional (N, 3), got {pts.ndim} dimension(s)")
    if pts.shape[1] != 3:
        raise ValueError(f"points must have 3 columns, got {pts.shape[1]}")
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    return pts


def _split_config(config: Optional[Mapping[str, Any]]) -> Tuple[RepresentationConfig, Optional[int]]:
    cfg = dict(config or {})
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    channels = cfg.get("channels", "local")
    if channels not in _CHANNEL_CHOICES:
        raise ValueError(f"unknown channels {channels!r}, "
                         f"expected one of {sorted(_CHANNEL_CHOICES)}")
    anchor = cfg.get("anchor", "centered")
    if anchor not in ANCHOR_MODES:
        raise ValueError(f"unknown anchor {anchor!r}, expected one of {ANCHOR_MODES}")
    partitions = cfg.get("partitions", 36)
    if not isinstance(partitions, int):
        partitions = tuple(int(k) for k in partitions)
    rep_cfg = RepresentationConfig(
        levels=int(cfg.get("levels", 2)),
        partitions=partitions,
        resolution=int(cfg.get("resolution", 32)),
        layout=_CHANNEL_CHOICES[channels],
        anchor_mode=anchor,
        seed=int(cfg.get("seed", 0)),
        include_root_map=not bool(cfg.get("no_root_map", False)),
        spherical_baseline=bool(cfg.get("spherical_baseline", False)),
    )
    workers = cfg.get("workers")
    return rep_cfg, None if workers is None else int(workers)


def _node_mapping(node: EllipsoidNode) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "level": node.level,
        "parent": node.parent,
        "members": node.members,
        "feature": node.feature.as_array(),
        "map": None,
    }
    if node.map is not None:
        out["map"] = {
            "m": node.map.m,
            "channels": node.map.layout.flags(),
            "data": node.map.data,
            "point_index": node.map.point_index,
        }
    return out


def py_represent(points, config: Optional[Mapping[str, Any]] = None) -> List[Dict[str, Any]]:
    """Build the hierarchy for an N x 3 cloud; returns one mapping per node.

    Config keys (all optional): levels, partitions, resolution, channels
    ("local"/"full"), anchor, seed, no_root_map, spherical_baseline,
    workers.  Each node mapping carries level, parent, members, the
    9-value feature, and (when present) a map sub-mapping with m,
    channel flags, the (m, m, C) data block, and the (m, m) point index.
    """
    pts = _check_points(points)
    rep_cfg, workers = _split_config(config)
    rep = represent_hierarchical(pts, rep_cfg, workers=workers)
    return [_node_mapping(nd) for nd in rep.nodes]


def _rebuild(nodes: Sequence[Mapping[str, Any]]) -> HierarchicalRepresentation:
    if not nodes:
        raise ValueError("empty node list")
    built: List[EllipsoidNode] = []
    resolution = None
    layout = None
    for i, nd in enumerate(nodes):
        feature = np.asarray(nd["feature"], dtype=np.float64)
        if feature.shape != (9,):
            raise ValueError(f"node {i} feature must have shape (9,), got {feature.shape}")
        feat = EllipsoidFeature(rotvec=feature[:3].copy(),
                                radii=feature[3:6].copy(),
                                center=feature[6:9].copy())
        frame = EllipsoidFrame(rotation=rotvec_to_rotation(feat.rotvec),
                               radii=feat.radii, center=feat.center)
        members = np.asarray(nd["members"], dtype=np.int64)
        fmap = None
        raw_map = nd.get("map")
        if raw_map is not None:
            m = int(raw_map["m"])
            map_layout = ChannelLayout.from_flags(int(raw_map["channels"]))
            data = np.asarray(raw_map["data"], dtype=np.float64)
            point_index = np.asarray(raw_map["point_index"], dtype=np.int64)
            if data.shape != (m, m, map_layout.n_channels):
                raise ValueError(f"node {i} map data shape {data.shape} does not "
                                 f"match ({m}, {m}, {map_layout.n_channels})")
            if point_index.shape != (m, m):
                raise ValueError(f"node {i} point index shape {point_index.shape} "
                                 f"does not match ({m}, {m})")
            fmap = FeatureMap(m=m, layout=map_layout, data=data,
                              point_index=point_index)
            resolution = m
            layout = map_layout
        parent = nd["parent"]
        built.append(EllipsoidNode(level=int(nd["level"]),
                                   parent=None if parent is None else int(parent),
                                   members=members, frame=frame, feature=feat,
                                   map=fmap))
    if resolution is None:
        raise ValueError("nodes carry no feature maps")
    levels = max(nd.level for nd in built) + 1
    n_level1 = sum(1 for nd in built if nd.level == 1)
    cfg = RepresentationConfig(
        levels=levels,
        partitions=max(n_level1, 1),
        resolution=resolution,
        layout=layout,
        include_root_map=built[0].map is not None,
    )
    return HierarchicalRepresentation(nodes=built, config=cfg,
                                      n_points=len(built[0].members))


def py_backproject(nodes: Sequence[Mapping[str, Any]], pixel_labels,
                   points, n_classes: Optional[int] = None) -> np.ndarray:
    """Fuse per-pixel labels over the deepest maps into per-point labels.

    ``pixel_labels`` is (D, m, m) integer class ids or (D, m, m, K) float
    scores, one slab per deepest-level node in node order.
    """
    pts = _check_points(points)
    rep = _rebuild(nodes)
    if len(pts) != rep.n_points:
        raise ValueError(f"points length {len(pts)} does not match "
                         f"representation point count {rep.n_points}")
    labels = np.asarray(pixel_labels)
    deep = deepest_mapped_nodes(rep)
    if labels.ndim not in (3, 4) or labels.shape[0] != len(deep):
        raise ValueError(
            f"pixel labels must be ({len(deep)}, m, m) ids or "
            f"({len(deep)}, m, m, K) scores, got {labels.shape}")
    return backproject_labels(rep, list(labels), pts, n_classes=n_classes).labels


def py_point_usage_rate(nodes: Sequence[Mapping[str, Any]]) -> float:
    """Fraction of points backing at least one deepest-level pixel."""
    return point_usage_rate(_rebuild(nodes))


def py_max_segmentation_iou(nodes: Sequence[Mapping[str, Any]], points,
                            gt_labels, part_classes=None) -> float:
    """Segmentation ceiling of the representation for one labeled cloud."""
    pts = _check_points(points)
    rep = _rebuild(nodes)
    if len(pts) != rep.n_points:
        raise ValueError(f"points length {len(pts)} does not match "
                         f"representation point count {rep.n_points}")
    return max_segmentation_iou(rep, pts, gt_labels, part_classes=part_classes)
