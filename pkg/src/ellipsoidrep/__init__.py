"""Hierarchical ellipsoid-surface 2D feature maps for 3D point clouds.

Fit an oriented ellipsoid to a cloud, shoot a spherical grid of anchors
from its surface into the cloud, and store the nearest point per pixel:
that yields a dense 2D map of the shape.  Decomposing the cloud with
k-means and repeating per partition recovers the detail a single map
misses.  This package provides the geometry, the hierarchy builder, label
back-projection, quality metrics, file formats, and a CLI.
"""

from .augment import ROTATION_MODES, augment
from .dataio import (
    DatasetManifest,
    EfmError,
    ManifestEntry,
    load_entry,
    load_labels,
    load_manifest,
    load_xyz,
    read_efm,
    write_efm,
    write_labels,
    write_xyz,
)
from .dataset import MetricsRow, dataset_metrics
from .decomposition import (
    PartitionAssignment,
    SplitMix64,
    kmeans_partition,
    partition_points,
)
from .geometry import (
    ANCHOR_MODES,
    EllipsoidFeature,
    EllipsoidFrame,
    anchor_world,
    circumsphere_frame,
    pca_frame,
    rotation_to_rotvec,
    rotvec_to_rotation,
    sphere_anchor,
    to_local,
    unit_anchor_grid,
)
from .knn import NNIndex, build_index, nearest, nearest_batch, nearest_bruteforce
from .representation import (
    FULL_LAYOUT,
    LOCAL_LAYOUT,
    ChannelLayout,
    EllipsoidNode,
    FeatureMap,
    HierarchicalRepresentation,
    RepresentationConfig,
    represent_hierarchical,
    represent_single,
    usage_mask,
)
from .segmentation import (
    SegmentationResult,
    backproject_labels,
    instance_miou,
    max_segmentation_iou,
    point_usage_rate,
)

__version__ = "0.1.0"

__all__ = [
    "ANCHOR_MODES",
    "ROTATION_MODES",
    "ChannelLayout",
    "DatasetManifest",
    "EfmError",
    "EllipsoidFeature",
    "EllipsoidFrame",
    "EllipsoidNode",
    "FULL_LAYOUT",
    "FeatureMap",
    "HierarchicalRepresentation",
    "LOCAL_LAYOUT",
    "ManifestEntry",
    "MetricsRow",
    "NNIndex",
    "PartitionAssignment",
    "RepresentationConfig",
    "SegmentationResult",
    "SplitMix64",
    "anchor_world",
    "augment",
    "backproject_labels",
    "build_index",
    "circumsphere_frame",
    "dataset_metrics",
    "instance_miou",
    "kmeans_partition",
    "load_entry",
    "load_labels",
    "load_manifest",
    "load_xyz",
    "max_segmentation_iou",
    "nearest",
    "nearest_batch",
    "nearest_bruteforce",
    "partition_points",
    "pca_frame",
    "point_usage_rate",
    "read_efm",
    "represent_hierarchical",
    "represent_single",
    "rotation_to_rotvec",
    "rotvec_to_rotation",
    "sphere_anchor",
    "to_local",
    "unit_anchor_grid",
    "usage_mask",
    "write_efm",
    "write_labels",
    "write_xyz",
]
