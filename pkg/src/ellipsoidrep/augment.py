"""Seeded train-time augmentation: rotation followed by clipped jitter."""

from __future__ import annotations

import numpy as np

from .geometry import as_points

__all__ = ["ROTATION_MODES", "augment"]

ROTATION_MODES = ("none", "up_axis", "so3")


def _up_axis_rotation(rng: np.random.Generator) -> np.ndarray:
    ang = rng.uniform(0.0, 2.0 * np.pi)
    c, s = np.cos(ang), np.sin(ang)
    # rotation about +y; the y coordinate passes through untouched
    return np.array([[c, 0.0, s],
                     [0.0, 1.0, 0.0],
                     [-s, 0.0, c]])


def _so3_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def augment(points, seed: int = 0, rotation_mode: str = "up_axis",
            jitter_sigma: float = 0.01, jitter_clip: float = 0.05) -> np.ndarray:
    """Rotate a cloud (none / about +y / uniform 3D) then add clipped
    Gaussian jitter.  Deterministic for a given seed; sigma 0 with rotation
    ``none`` returns the input unchanged.
    """
    pts = as_points(points)
    if rotation_mode not in ROTATION_MODES:
        raise ValueError(f"unknown rotation mode {rotation_mode!r}")
    if jitter_sigma < 0.0 or jitter_clip < 0.0:
        raise ValueError("jitter parameters must be non-negative")

    rng = np.random.default_rng(seed)
    out = pts
    if rotation_mode == "up_axis":
        out = out @ _up_axis_rotation(rng).T
    elif rotation_mode == "so3":
        out = out @ _so3_rotation(rng).T
    if jitter_sigma > 0.0:
        noise = rng.normal(0.0, jitter_sigma, size=out.shape)
        out = out + np.clip(noise, -jitter_clip, jitter_clip)
    return np.array(out, dtype=np.float64, copy=True)
