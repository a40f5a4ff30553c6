"""File formats: xyz text clouds, dataset manifests, and the EFM binary
container for hierarchical representations.

EFM is little-endian throughout.  Header: magic ``EFM1``, u32 version (=1),
u32 point count, u32 node count, u32 levels, u32 channel count, u8 anchor
mode (0 paper / 1 centered), u8 channel flags (bit0 world, bit1 local, bit2
sphere, bit3 pixel), u16 reserved (=0).  Then per node in breadth-first
order: u32 level, u32 parent (0xFFFFFFFF for the root), u32 member count,
the member indices as u32, the 9 feature values as f64 (rotation vector,
radii, center), u8 has_map, and if set: u32 m, m*m*C f64 channel values in
[v, u, channel] order, m*m u32 point indices.  Writers replace the target
atomically; readers fail with the byte offset of the first bad field.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .geometry import EllipsoidFeature, EllipsoidFrame, rotvec_to_rotation
from .representation import (
    ChannelLayout,
    EllipsoidNode,
    FeatureMap,
    HierarchicalRepresentation,
    RepresentationConfig,
)

__all__ = [
    "EfmError",
    "load_xyz",
    "write_xyz",
    "load_labels",
    "write_labels",
    "write_efm",
    "read_efm",
    "ManifestEntry",
    "DatasetManifest",
    "load_manifest",
    "load_entry",
]

EFM_MAGIC = b"EFM1"
EFM_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIBBH")
_NO_PARENT = 0xFFFFFFFF
_ANCHOR_BYTES = {"paper": 0, "centered": 1}
_ANCHOR_NAMES = {v: k for k, v in _ANCHOR_BYTES.items()}


class EfmError(ValueError):
    """Raised when an EFM file is malformed; messages carry byte offsets."""


# ---------------------------------------------------------------------------
# xyz text format
# ---------------------------------------------------------------------------

def load_xyz(path) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Read a whitespace-separated cloud file.

    Rows are ``x y z`` or ``x y z label``; blank lines and ``#`` comments
    are skipped.  All data rows must agree on whether a label is present.
    Returns ``(points, labels)`` with labels None for 3-column files.
    """
    coords: List[Tuple[float, float, float]] = []
    labels: List[int] = []
    has_labels: Optional[bool] = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) not in (3, 4):
                raise ValueError(
                    f"{path}: line {lineno}: expected 3 or 4 columns, got {len(tokens)}")
            try:
                x, y, z = (float(t) for t in tokens[:3])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad coordinate") from None
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
                raise ValueError(f"{path}: line {lineno}: non-finite coordinate")
            row_labeled = len(tokens) == 4
            if has_labels is None:
                has_labels = row_labeled
            elif has_labels != row_labeled:
                raise ValueError(
                    f"{path}: line {lineno}: mixed labeled and unlabeled rows")
            if row_labeled:
                try:
                    labels.append(int(tokens[3]))
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: bad label") from None
            coords.append((x, y, z))
    if not coords:
        raise ValueError(f"{path}: empty point cloud file")
    pts = np.array(coords, dtype=np.float64)
    lab = np.array(labels, dtype=np.int64) if has_labels else None
    return pts, lab


def write_xyz(path, points, labels=None) -> None:
    """Write a cloud (optionally labeled) with full float64 precision.

    17 significant digits make the text round trip bit-exact.
    """
    pts = np.asarray(points, dtype=np.float64)
    if labels is not None:
        lab = np.asarray(labels)
        if lab.shape != (len(pts),):
            raise ValueError("labels do not match point count")
    lines = []
    for i, (x, y, z) in enumerate(pts):
        if labels is None:
            lines.append(f"{x:.17g} {y:.17g} {z:.17g}\n")
        else:
            lines.append(f"{x:.17g} {y:.17g} {z:.17g} {int(labels[i])}\n")
    _atomic_write_text(path, "".join(lines))


def load_labels(path) -> np.ndarray:
    """Read one integer label per line (blank lines / ``#`` comments skipped)."""
    out: List[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(int(line.split()[0]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad label") from None
    if not out:
        raise ValueError(f"{path}: empty label file")
    return np.array(out, dtype=np.int64)


def write_labels(path, labels) -> None:
    lab = np.asarray(labels)
    _atomic_write_text(path, "".join(f"{int(v)}\n" for v in lab))


def _atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# EFM binary container
# ---------------------------------------------------------------------------

def write_efm(rep: HierarchicalRepresentation, path) -> None:
    """Serialize a representation; the file appears atomically or not at all."""
    layout = rep.config.layout
    c = layout.n_channels
    parts = [_HEADER.pack(EFM_MAGIC, EFM_VERSION, rep.n_points, len(rep.nodes),
                          rep.config.levels, c,
                          _ANCHOR_BYTES[rep.config.anchor_mode], layout.flags(), 0)]
    for nd in rep.nodes:
        parent = _NO_PARENT if nd.parent is None else nd.parent
        parts.append(struct.pack("<III", nd.level, parent, len(nd.members)))
        parts.append(nd.members.astype("<u4").tobytes())
        parts.append(nd.feature.as_array().astype("<f8").tobytes())
        if nd.map is None:
            parts.append(b"\x00")
        else:
            parts.append(b"\x01")
            parts.append(struct.pack("<I", nd.map.m))
            parts.append(np.ascontiguousarray(nd.map.data).astype("<f8").tobytes())
            parts.append(nd.map.point_index.astype("<u4").tobytes())
    blob = b"".join(parts)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int, what: str) -> Tuple[bytes, int]:
        if self.off + n > len(self.data):
            raise EfmError(
                f"truncated file: need {n} bytes for {what} at offset {self.off}, "
                f"file ends at {len(self.data)}")
        start = self.off
        self.off += n
        return self.data[start:start + n], start

    def u32(self, what: str) -> Tuple[int, int]:
        raw, start = self.take(4, what)
        return struct.unpack("<I", raw)[0], start

    def u8(self, what: str) -> Tuple[int, int]:
        raw, start = self.take(1, what)
        return raw[0], start


def read_efm(path) -> HierarchicalRepresentation:
    """Parse an EFM file back into a representation.

    The k-means seed, partition counts, and baseline flag are not stored;
    the reconstructed config carries seed 0, partitions inferred from the
    level-1 node count, and spherical_baseline False.
    """
    data = Path(path).read_bytes()
    cur = _Cursor(data)

    raw, start = cur.take(_HEADER.size, "header")
    magic, version, n_points, node_count, levels, n_channels, anchor_b, flags, reserved = \
        _HEADER.unpack(raw)
    if magic != EFM_MAGIC:
        raise EfmError(f"bad magic {magic!r} at offset 0")
    if version != EFM_VERSION:
        raise EfmError(f"unsupported version {version} at offset 4")
    if node_count < 1:
        raise EfmError("node count is zero at offset 12")
    if levels < 1:
        raise EfmError("level count is zero at offset 16")
    if anchor_b not in _ANCHOR_NAMES:
        raise EfmError(f"unknown anchor mode {anchor_b} at offset 24")
    try:
        layout = ChannelLayout.from_flags(flags)
    except ValueError:
        raise EfmError(f"invalid channel flags 0x{flags:02x} at offset 25") from None
    if layout.n_channels != n_channels:
        raise EfmError(
            f"channel count {n_channels} at offset 20 does not match flags 0x{flags:02x}")
    if reserved != 0:
        raise EfmError(f"reserved field is {reserved} at offset 26")

    nodes: List[EllipsoidNode] = []
    resolution = None
    for i in range(node_count):
        level, off_level = cur.u32(f"node {i} level")
        parent_raw, off_parent = cur.u32(f"node {i} parent")
        member_count, off_members = cur.u32(f"node {i} member count")
        if i == 0:
            if parent_raw != _NO_PARENT:
                raise EfmError(f"root parent must be 0xFFFFFFFF at offset {off_parent}")
            if level != 0:
                raise EfmError(f"root level must be 0 at offset {off_level}")
            parent = None
        else:
            if parent_raw >= i:
                raise EfmError(f"parent {parent_raw} out of order at offset {off_parent}")
            parent = int(parent_raw)
            if level != nodes[parent].level + 1:
                raise EfmError(f"level {level} breaks hierarchy at offset {off_level}")
        if member_count < 1:
            raise EfmError(f"empty node at offset {off_members}")
        if member_count > n_points:
            raise EfmError(f"member count {member_count} exceeds point count "
                           f"at offset {off_members}")

        raw, start = cur.take(4 * member_count, f"node {i} member indices")
        members = np.frombuffer(raw, dtype="<u4").astype(np.int64)
        if members.max() >= n_points:
            raise EfmError(f"member index out of range at offset {start}")

        raw, start = cur.take(8 * 9, f"node {i} feature")
        feat = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        if not np.isfinite(feat).all():
            raise EfmError(f"non-finite feature value at offset {start}")
        feature = EllipsoidFeature(rotvec=feat[0:3].copy(), radii=feat[3:6].copy(),
                                   center=feat[6:9].copy())
        frame = EllipsoidFrame(rotation=rotvec_to_rotation(feature.rotvec),
                               radii=feature.radii, center=feature.center)

        has_map, off_has = cur.u8(f"node {i} map flag")
        if has_map not in (0, 1):
            raise EfmError(f"map flag must be 0 or 1 at offset {off_has}")
        fmap = None
        if has_map:
            m, off_m = cur.u32(f"node {i} map resolution")
            if m < 1:
                raise EfmError(f"map resolution is zero at offset {off_m}")
            raw, start = cur.take(8 * m * m * n_channels, f"node {i} map data")
            grid = np.frombuffer(raw, dtype="<f8").astype(np.float64)
            grid = grid.reshape(m, m, n_channels)
            raw, start = cur.take(4 * m * m, f"node {i} map point indices")
            pidx = np.frombuffer(raw, dtype="<u4").astype(np.int64)
            if pidx.max() >= n_points:
                raise EfmError(f"map point index out of range at offset {start}")
            fmap = FeatureMap(m=m, layout=layout, data=grid,
                              point_index=pidx.reshape(m, m))
            resolution = m if resolution is None else resolution
        nodes.append(EllipsoidNode(level=int(level), parent=parent, members=members,
                                   frame=frame, feature=feature, map=fmap))

    if cur.off != len(data):
        raise EfmError(f"unexpected trailing bytes at offset {cur.off}")
    if resolution is None:
        raise EfmError("file contains no feature maps")

    n_level1 = sum(1 for nd in nodes if nd.level == 1)
    config = RepresentationConfig(
        levels=int(levels),
        partitions=n_level1 if levels > 1 else 36,
        resolution=int(resolution),
        layout=layout,
        anchor_mode=_ANCHOR_NAMES[anchor_b],
        seed=0,
        include_root_map=nodes[0].map is not None,
        spherical_baseline=False,
    )
    return HierarchicalRepresentation(nodes=nodes, config=config, n_points=int(n_points))


# ---------------------------------------------------------------------------
# dataset manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    cloud: Path
    labels: Optional[Path]
    category: int


@dataclass(frozen=True)
class DatasetManifest:
    """Category -> part-class table plus the object list, paths resolved."""

    categories: Dict[int, Tuple[int, ...]]
    entries: Tuple[ManifestEntry, ...]


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a JSON dataset manifest.

    Schema: ``{"root": "optional/prefix", "categories": {"<id>": [part ids]},
    "entries": [{"cloud": "rel.xyz", "labels": "rel.seg"?, "category": id}]}``.
    Relative paths resolve against ``root`` (itself relative to the manifest's
    directory).
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise ValueError(f"{path}: manifest must be a JSON object")

    base = path.parent
    root = base / spec.get("root", ".")

    raw_cats = spec.get("categories")
    if not isinstance(raw_cats, dict) or not raw_cats:
        raise ValueError(f"{path}: missing categories table")
    categories: Dict[int, Tuple[int, ...]] = {}
    for key, parts in raw_cats.items():
        try:
            cat = int(key)
        except ValueError:
            raise ValueError(f"{path}: bad category id {key!r}") from None
        if not isinstance(parts, list) or not parts:
            raise ValueError(f"{path}: category {key} has no part classes")
        categories[cat] = tuple(int(p) for p in parts)

    raw_entries = spec.get("entries")
    if not isinstance(raw_entries, list) or not raw_entries:
        raise ValueError(f"{path}: missing entries list")
    entries = []
    for i, e in enumerate(raw_entries):
        if not isinstance(e, dict) or "cloud" not in e or "category" not in e:
            raise ValueError(f"{path}: entry {i}: needs 'cloud' and 'category'")
        cat = int(e["category"])
        if cat not in categories:
            raise ValueError(f"{path}: entry {i}: unknown category {cat}")
        cloud = root / e["cloud"]
        if not cloud.is_file():
            raise ValueError(f"{path}: entry {i}: missing cloud file {cloud}")
        labels = None
        if e.get("labels") is not None:
            labels = root / e["labels"]
            if not labels.is_file():
                raise ValueError(f"{path}: entry {i}: missing label file {labels}")
        entries.append(ManifestEntry(cloud=cloud, labels=labels, category=cat))
    return DatasetManifest(categories=categories, entries=tuple(entries))


def load_entry(entry: ManifestEntry) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Load one object: label file wins over labels inlined in the cloud."""
    pts, inline = load_xyz(entry.cloud)
    if entry.labels is not None:
        lab = load_labels(entry.labels)
        if lab.shape != (len(pts),):
            raise ValueError(f"{entry.labels}: {len(lab)} labels for {len(pts)} points")
        return pts, lab
    return pts, inline
