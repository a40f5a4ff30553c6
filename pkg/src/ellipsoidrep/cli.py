"""Command-line front end.

Subcommands: ``repr`` (cloud -> EFM file), ``metrics`` (manifest -> TSV of
usage / IoU means), ``backproject`` (EFM + pixel labels -> per-point
labels), ``bench`` (representation timing), ``plotdata`` (EFM -> flat TSV
for external plotting).  Runtime failures print one ``error: ...`` line on
stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from itertools import product
from typing import List, Optional

import numpy as np

from .augment import ROTATION_MODES, augment
from .dataio import (
    load_labels,
    load_manifest,
    load_xyz,
    read_efm,
    write_efm,
    write_labels,
)
from .dataset import dataset_metrics
from .geometry import ANCHOR_MODES, anchor_world, unit_anchor_grid
from .representation import (
    FULL_LAYOUT,
    LOCAL_LAYOUT,
    RepresentationConfig,
    represent_hierarchical,
    resolve_workers,
)
from .segmentation import backproject_labels, deepest_mapped_nodes

__all__ = ["main"]

_CHANNEL_CHOICES = {"local": LOCAL_LAYOUT, "full": FULL_LAYOUT}


def _add_config_flags(p: argparse.ArgumentParser, repeated: bool = False) -> None:
    nargs = "+" if repeated else None
    p.add_argument("--levels", type=int, default=[2] if repeated else 2, nargs=nargs,
                   help="hierarchy depth (default 2)")
    p.add_argument("--partitions", type=int, default=[36] if repeated else 36,
                   nargs=nargs, help="k-means partitions per decomposition (default 36)")
    p.add_argument("--resolution", type=int, default=[32] if repeated else 32,
                   nargs=nargs, help="feature map resolution m (default 32)")
    p.add_argument("--channels", choices=sorted(_CHANNEL_CHOICES), default="local",
                   help="channel layout (default local)")
    p.add_argument("--anchor", choices=ANCHOR_MODES, default="centered",
                   help="anchor placement (default centered)")
    p.add_argument("--seed", type=int, default=0, help="k-means seed (default 0)")
    p.add_argument("--no-root-map", action="store_true",
                   help="skip the level-0 map when levels > 1")
    p.add_argument("--spherical-baseline", action="store_true",
                   help="un-oriented circumsphere baseline (single level)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: ELLIPSOID_THREADS or 1)")


def _config_from(args, levels: int, partitions: int, resolution: int) -> RepresentationConfig:
    return RepresentationConfig(
        levels=levels,
        partitions=partitions,
        resolution=resolution,
        layout=_CHANNEL_CHOICES[args.channels],
        anchor_mode=args.anchor,
        seed=args.seed,
        include_root_map=not args.no_root_map,
        spherical_baseline=args.spherical_baseline,
    )


def _cmd_repr(args) -> int:
    pts, _ = load_xyz(args.input)
    if args.augment:
        pts = augment(pts, seed=args.augment_seed, rotation_mode=args.augment_rotation,
                      jitter_sigma=args.augment_sigma, jitter_clip=args.augment_clip)
    cfg = _config_from(args, args.levels, args.partitions, args.resolution)
    rep = represent_hierarchical(pts, cfg, workers=args.workers)
    write_efm(rep, args.output)
    return 0


def _format_float(x: float) -> str:
    return "nan" if x != x else f"{x:.6f}"


def _cmd_metrics(args) -> int:
    manifest = load_manifest(args.manifest)
    configs = [_config_from(args, lv, pc, res)
               for lv, pc, res in product(args.levels, args.partitions, args.resolution)]
    rows = dataset_metrics(manifest, configs, workers=args.workers)
    lines = ["levels\tpartitions\tresolution\tanchor\tseed\tspherical\t"
             "point_usage_rate\tmax_seg_iou\tn_objects\tn_labeled"]
    for row in rows:
        cfg = row.config
        parts = cfg.partitions if isinstance(cfg.partitions, int) else \
            ",".join(str(k) for k in cfg.partitions)
        lines.append("\t".join([
            str(cfg.levels), str(parts), str(cfg.resolution), cfg.anchor_mode,
            str(cfg.seed), "1" if cfg.spherical_baseline else "0",
            _format_float(row.point_usage_rate), _format_float(row.max_seg_iou),
            str(row.n_objects), str(row.n_labeled),
        ]))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_backproject(args) -> int:
    rep = read_efm(args.efm)
    pts, _ = load_xyz(args.input)
    raw = np.load(args.pixel_labels)
    nodes = deepest_mapped_nodes(rep)
    if raw.ndim not in (3, 4) or raw.shape[0] != len(nodes):
        raise ValueError(
            f"pixel labels must be ({len(nodes)}, m, m) ids or ({len(nodes)}, m, m, K) "
            f"scores, got {raw.shape}")
    res = backproject_labels(rep, list(raw), pts)
    write_labels(args.output, res.labels)
    return 0


def _cmd_bench(args) -> int:
    pts, _ = load_xyz(args.input)
    cfg = _config_from(args, args.levels, args.partitions, args.resolution)
    times_ms = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        represent_hierarchical(pts, cfg, workers=args.workers)
        times_ms.append((time.perf_counter() - t0) * 1e3)
    mean = statistics.fmean(times_ms)
    std = statistics.stdev(times_ms) if len(times_ms) > 1 else 0.0
    sys.stdout.write("mean_ms\tstd_ms\trepeats\tn_points\n")
    sys.stdout.write(f"{mean:.3f}\t{std:.3f}\t{args.repeat}\t{len(pts)}\n")
    return 0


def _cmd_plotdata(args) -> int:
    rep = read_efm(args.efm)
    layout = rep.config.layout
    lines = ["kind\tnode\tlevel\tv\tu\tanchor_x\tanchor_y\tanchor_z\t"
             "point_index\tpx\tpy\tpz\tused"]
    world_off = None
    local_off = None
    off = 0
    for name, width in (("world_position", 3), ("local_position", 3),
                        ("sphere_anchor", 3), ("pixel_coords", 2)):
        if getattr(layout, name):
            if name == "world_position":
                world_off = off
            if name == "local_position":
                local_off = off
            off += width

    mapped = np.zeros(rep.n_points, dtype=bool)
    for node_id, nd in enumerate(rep.nodes):
        if nd.map is None:
            continue
        m = nd.map.m
        anchors = anchor_world(nd.frame, unit_anchor_grid(m, rep.config.anchor_mode))
        if world_off is not None:
            world = nd.map.data[..., world_off:world_off + 3]
        elif local_off is not None:
            local = nd.map.data[..., local_off:local_off + 3]
            world = anchor_world(nd.frame, local)  # reconstruction via the frame
        else:
            world = None
        for v in range(m):
            for u in range(m):
                pi = int(nd.map.point_index[v, u])
                mapped[pi] = True
                pos = ("", "", "") if world is None else \
                    tuple(f"{x:.9g}" for x in world[v, u])
                lines.append("\t".join([
                    "pixel", str(node_id), str(nd.level), str(v), str(u),
                    f"{anchors[v, u, 0]:.9g}", f"{anchors[v, u, 1]:.9g}",
                    f"{anchors[v, u, 2]:.9g}", str(pi), *pos, ""]))
    for i in range(rep.n_points):
        lines.append("\t".join(["point", "", "", "", "", "", "", "", str(i),
                                "", "", "", "1" if mapped[i] else "0"]))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ellipsoidrep",
        description="Hierarchical ellipsoid-surface feature maps for point clouds")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("repr", help="represent a cloud and write an EFM file")
    p.add_argument("--input", required=True, help="input .xyz cloud")
    p.add_argument("--output", required=True, help="output .efm path")
    _add_config_flags(p)
    p.add_argument("--augment", action="store_true", help="augment before representing")
    p.add_argument("--augment-rotation", choices=ROTATION_MODES, default="up_axis")
    p.add_argument("--augment-sigma", type=float, default=0.01)
    p.add_argument("--augment-clip", type=float, default=0.05)
    p.add_argument("--augment-seed", type=int, default=0)
    p.set_defaults(func=_cmd_repr)

    p = sub.add_parser("metrics", help="usage / IoU means over a dataset manifest")
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--output", help="output TSV path (default stdout)")
    _add_config_flags(p, repeated=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("backproject", help="pixel labels -> per-point labels")
    p.add_argument("--efm", required=True, help="representation file")
    p.add_argument("--input", required=True,
                   help="the represented .xyz cloud (for unmapped-point fill)")
    p.add_argument("--pixel-labels", required=True,
                   help=".npy with (nodes, m, m) ids or (nodes, m, m, K) scores, "
                        "deepest-level nodes in file order")
    p.add_argument("--output", required=True, help="output label file")
    p.set_defaults(func=_cmd_backproject)

    p = sub.add_parser("bench", help="time the representation build")
    p.add_argument("--input", required=True, help="input .xyz cloud")
    p.add_argument("--repeat", type=int, default=5)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plotdata", help="dump an EFM file as flat TSV")
    p.add_argument("--efm", required=True, help="representation file")
    p.add_argument("--output", help="output TSV path (default stdout)")
    p.set_defaults(func=_cmd_plotdata)
    return top


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
