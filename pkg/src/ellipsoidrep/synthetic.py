"""Seeded synthetic clouds for tests, demos, and benchmarks.

Every generator takes an explicit seed and is deterministic; ``suite()``
returns the 20-cloud mix (64 to 2048 points, isotropic and anisotropic
shapes) the test-suite and the demo scripts share.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from .geometry import rotvec_to_rotation

__all__ = [
    "gaussian_blob",
    "uniform_ball",
    "box_volume",
    "ellipsoid_surface",
    "shell",
    "two_blobs",
    "plane_patch",
    "filament",
    "helix",
    "torus",
    "cylinder_side",
    "solid_cylinder",
    "height_bands",
    "suite",
]


def _finish(pts: np.ndarray, rotation, center) -> np.ndarray:
    if rotation is not None:
        pts = pts @ np.asarray(rotation, dtype=np.float64).T
    if center is not None:
        pts = pts + np.asarray(center, dtype=np.float64)
    return pts


def gaussian_blob(n: int, seed: int, scale=(1.0, 1.0, 1.0),
                  rotation=None, center=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3)) * np.asarray(scale, dtype=np.float64)
    return _finish(pts, rotation, center)


def uniform_ball(n: int, seed: int, radius: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / 3.0)
    return dirs * r


def box_volume(n: int, seed: int, half_extents=(1.0, 1.0, 1.0),
               rotation=None, center=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    he = np.asarray(half_extents, dtype=np.float64)
    pts = rng.uniform(-1.0, 1.0, size=(n, 3)) * he
    return _finish(pts, rotation, center)


def ellipsoid_surface(n: int, seed: int, radii=(1.0, 0.6, 0.3),
                      rotation=None, center=None) -> np.ndarray:
    """Area-uniform samples on an ellipsoid surface (rejection sampling)."""
    rng = np.random.default_rng(seed)
    a, b, c = (float(r) for r in radii)
    # surface-area weight of the unit-sphere parameterization, max where the
    # smallest semi-axis pierces the surface
    w_max = a * b * c / min(a, b, c)
    out = []
    got = 0
    while got < n:
        dirs = rng.normal(size=(4 * n, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        w = a * b * c * np.sqrt((dirs[:, 0] / a) ** 2
                                + (dirs[:, 1] / b) ** 2
                                + (dirs[:, 2] / c) ** 2)
        keep = rng.uniform(size=len(dirs)) * w_max < w
        sel = dirs[keep]
        out.append(sel)
        got += len(sel)
    pts = np.concatenate(out)[:n] * np.array([a, b, c])
    return _finish(pts, rotation, center)


def shell(n: int, seed: int, radii=(1.0, 0.5, 0.25), thickness: float = 0.05,
          rotation=None, center=None) -> np.ndarray:
    """Ellipsoid surface with radial Gaussian scatter, like a scanned wall."""
    pts = ellipsoid_surface(n, seed, radii=radii)
    rng = np.random.default_rng(seed + 1)
    pts = pts * (1.0 + rng.normal(0.0, thickness, size=(n, 1)))
    return _finish(pts, rotation, center)


def two_blobs(n: int, seed: int, separation: float = 1.6,
              sigma: float = 0.25) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n_a = n // 2
    a = rng.normal(size=(n_a, 3)) * sigma + np.array([separation / 2.0, 0.0, 0.0])
    b = rng.normal(size=(n - n_a, 3)) * sigma - np.array([separation / 2.0, 0.0, 0.0])
    return np.concatenate([a, b])


def plane_patch(n: int, seed: int, extents=(1.0, 0.8),
                thickness: float = 0.01) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-1.0, 1.0, size=(n, 2)) * np.asarray(extents, dtype=np.float64)
    z = rng.normal(0.0, thickness, size=(n, 1))
    return np.concatenate([xy, z], axis=1)


def filament(n: int, seed: int, half_length: float = 1.0,
             thickness: float = 0.02) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = rng.uniform(-half_length, half_length, size=(n, 1))
    cross = rng.normal(0.0, thickness, size=(n, 2))
    return np.concatenate([t, cross], axis=1)


def helix(n: int, seed: int, turns: float = 2.0, radius: float = 1.0,
          height: float = 1.5, noise: float = 0.02) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 1.0, size=n)
    ang = 2.0 * np.pi * turns * t
    pts = np.stack([radius * np.cos(ang), radius * np.sin(ang),
                    height * (t - 0.5)], axis=1)
    return pts + rng.normal(0.0, noise, size=(n, 3))


def torus(n: int, seed: int, major: float = 1.0, minor: float = 0.3) -> np.ndarray:
    """Area-uniform samples on a torus (rejection on the minor angle)."""
    rng = np.random.default_rng(seed)
    out = []
    got = 0
    ratio = minor / major
    while got < n:
        u = rng.uniform(0.0, 2.0 * np.pi, size=4 * n)
        v = rng.uniform(0.0, 2.0 * np.pi, size=4 * n)
        keep = rng.uniform(size=4 * n) * (1.0 + ratio) < 1.0 + ratio * np.cos(v)
        u, v = u[keep], v[keep]
        ring = major + minor * np.cos(v)
        out.append(np.stack([ring * np.cos(u), ring * np.sin(u),
                             minor * np.sin(v)], axis=1))
        got += len(u)
    return np.concatenate(out)[:n]


def cylinder_side(n: int, seed: int, radius: float = 0.3,
                  half_height: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
    z = rng.uniform(-half_height, half_height, size=n)
    return np.stack([radius * np.cos(ang), radius * np.sin(ang), z], axis=1)


def solid_cylinder(n: int, seed: int, radii=(0.5, 0.3),
                   half_height: float = 1.0) -> np.ndarray:
    """Volume-uniform samples in an elliptic cylinder along z."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
    rad = np.sqrt(rng.uniform(size=n))
    z = rng.uniform(-half_height, half_height, size=n)
    return np.stack([radii[0] * rad * np.cos(ang),
                     radii[1] * rad * np.sin(ang), z], axis=1)


def height_bands(points, n_bands: int = 4) -> np.ndarray:
    """Quantile bands along z; a cheap surrogate for part labels."""
    z = np.asarray(points, dtype=np.float64)[:, 2]
    edges = np.quantile(z, [i / n_bands for i in range(1, n_bands)])
    return np.searchsorted(edges, z, side="right").astype(np.int64)


def suite() -> List[Tuple[str, np.ndarray]]:
    """The shared 20-cloud mix; entry sizes span 64 to 2048 points."""
    tilt = rotvec_to_rotation(np.array([0.3, -0.7, 0.5]))
    lean = rotvec_to_rotation(np.array([-1.1, 0.2, 0.9]))
    return [
        ("gauss_iso_64", gaussian_blob(64, 10)),
        ("gauss_iso_256", gaussian_blob(256, 11)),
        ("gauss_iso_1024", gaussian_blob(1024, 12)),
        ("gauss_iso_2048", gaussian_blob(2048, 13)),
        ("ball_128", uniform_ball(128, 14)),
        ("box_iso_512", box_volume(512, 15)),
        ("shell_512", shell(512, 16, radii=(1.0, 0.6, 0.3))),
        ("shell_1024", shell(1024, 17, radii=(1.0, 0.5, 0.25), rotation=tilt)),
        ("shell_2048", shell(2048, 18, radii=(1.0, 0.45, 0.2),
                             rotation=lean, center=(0.4, -0.2, 0.1))),
        ("box_flat_1024", box_volume(1024, 19, half_extents=(1.0, 0.5, 0.1))),
        ("box_long_512", box_volume(512, 20, half_extents=(1.0, 0.3, 0.3))),
        ("box_tilted_2048", box_volume(2048, 21, half_extents=(1.0, 0.5, 0.25),
                                       rotation=tilt, center=(-0.3, 0.1, 0.2))),
        ("plane_1024", plane_patch(1024, 22)),
        ("two_blobs_768", two_blobs(768, 23)),
        ("filament_1024", filament(1024, 24)),
        ("helix_1024", helix(1024, 25)),
        ("torus_1024", torus(1024, 26)),
        ("solid_cyl_1024", solid_cylinder(1024, 27)),
        ("gauss_aniso_2048", gaussian_blob(2048, 28, scale=(1.0, 0.4, 0.15),
                                           rotation=lean)),
        ("gauss_aniso_512", gaussian_blob(512, 29, scale=(1.0, 0.5, 0.35))),
    ]
