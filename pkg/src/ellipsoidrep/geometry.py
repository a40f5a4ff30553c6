"""Oriented ellipsoid frames and the transforms between world space,
ellipsoid-local space, and the unit sphere.

A frame is fitted to a cloud by PCA: the covariance eigenvectors give the
rotation, the half-extents of the rotated cloud give the radii, and the
extent midpoint mapped back to world space gives the center.  Anchor points
on the fitted ellipsoid surface are obtained by scaling unit-sphere
directions by the radii and rotating them back out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "ANCHOR_MODES",
    "EllipsoidFrame",
    "EllipsoidFeature",
    "as_points",
    "pca_frame",
    "circumsphere_frame",
    "rotation_to_rotvec",
    "rotvec_to_rotation",
    "sphere_anchor",
    "unit_anchor_grid",
    "anchor_world",
    "to_local",
]

ANCHOR_MODES = ("paper", "centered")

# Degenerate clouds (planes, lines, repeated points) must keep strictly
# positive radii so ellipsoid-local coordinates stay finite.
RADIUS_FLOOR_ABS = 1e-9
RADIUS_FLOOR_REL = 1e-6


@dataclass(frozen=True)
class EllipsoidFrame:
    """Oriented ellipsoid in world space.

    ``rotation`` rows are the principal axes (so ``rotation @ p`` maps a
    world offset into the local frame), ``radii`` are the half-extents
    along those axes in descending order, ``center`` is the world-space
    midpoint.  Treat instances as immutable.
    """

    rotation: np.ndarray  # (3, 3) orthonormal, det +1
    radii: np.ndarray     # (3,) descending, strictly positive
    center: np.ndarray    # (3,)


@dataclass(frozen=True)
class EllipsoidFeature:
    """Nine-value global shape descriptor: rotation vector, radii, center."""

    rotvec: np.ndarray  # (3,) axis-angle, norm <= pi
    radii: np.ndarray   # (3,) descending
    center: np.ndarray  # (3,)

    def as_array(self) -> np.ndarray:
        """Pack into the flat (9,) order used on disk."""
        return np.concatenate([self.rotvec, self.radii, self.center])


def as_points(points) -> np.ndarray:
    """Validate and return an (N, 3) float64 view/copy of ``points``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected points with shape (N, 3), got {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError("empty point cloud")
    if not np.isfinite(pts).all():
        raise ValueError("non-finite input")
    return pts


def _normalize_axis_signs(axes: np.ndarray) -> np.ndarray:
    # Flip each axis so its largest-magnitude component is positive; on a
    # magnitude tie the first such component decides.
    out = axes.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0.0:
            row *= -1.0
    return out


def pca_frame(points) -> EllipsoidFrame:
    """Fit an oriented bounding ellipsoid frame to a cloud via PCA.

    Covariance is computed on mean-centered coordinates; the resulting
    rotation is applied to the *uncentered* points to measure extents, so
    the recovered center carries the cloud offset.
    """
    pts = as_points(points)
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / len(pts)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")
    axes = _normalize_axis_signs(eigvecs.T[order])

    local = pts @ axes.T
    lo = local.min(axis=0)
    hi = local.max(axis=0)
    radii = (hi - lo) / 2.0

    # Keep radii descending; stable sort so the eigenvalue order wins ties.
    extent_order = np.argsort(-radii, kind="stable")
    axes = axes[extent_order]
    radii = radii[extent_order]
    lo = lo[extent_order]
    hi = hi[extent_order]

    if np.linalg.det(axes) < 0.0:
        axes = axes.copy()
        axes[2] = -axes[2]
        lo[2], hi[2] = -hi[2], -lo[2]

    mid = (hi + lo) / 2.0
    center = axes.T @ mid
    floor = max(RADIUS_FLOOR_ABS, RADIUS_FLOOR_REL * float(radii.max()))
    radii = np.maximum(radii, floor)
    return EllipsoidFrame(rotation=axes, radii=radii, center=center)


def circumsphere_frame(points) -> EllipsoidFrame:
    """Axis-aligned circumscribed-sphere frame (un-oriented baseline).

    Identity rotation, bounding-box midpoint center, all three radii equal
    to the largest point distance from that center.
    """
    pts = as_points(points)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = (hi + lo) / 2.0
    d = pts - center
    r = float(np.sqrt((d * d).sum(axis=1)).max())
    radii = np.full(3, max(r, RADIUS_FLOOR_ABS))
    return EllipsoidFrame(rotation=np.eye(3), radii=radii, center=center)


def _quat_from_matrix(r: np.ndarray) -> np.ndarray:
    # Shepperd's method: branch on the largest of trace / diagonal entries
    # so the square root argument stays well away from zero.
    t = r[0, 0] + r[1, 1] + r[2, 2]
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([s / 4.0,
                      (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s,
                      (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s,
                      s / 4.0,
                      (r[0, 1] + r[1, 0]) / s,
                      (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] >= r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s,
                      (r[0, 1] + r[1, 0]) / s,
                      s / 4.0,
                      (r[1, 2] + r[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s,
                      (r[0, 2] + r[2, 0]) / s,
                      (r[1, 2] + r[2, 1]) / s,
                      s / 4.0])
    if q[0] < 0.0:
        q = -q
    return q


def rotation_to_rotvec(rotation) -> np.ndarray:
    """Rotation matrix -> axis-angle vector with norm in [0, pi].

    Goes through a quaternion so angles near pi stay numerically stable.
    """
    r = np.asarray(rotation, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"expected a (3, 3) rotation, got {r.shape}")
    q = _quat_from_matrix(r)
    n = float(np.sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]))
    if n < 1e-15:
        return np.zeros(3)
    angle = 2.0 * np.arctan2(n, q[0])
    return (q[1:] / n) * angle


def rotvec_to_rotation(rotvec) -> np.ndarray:
    """Axis-angle vector -> rotation matrix (Rodrigues)."""
    v = np.asarray(rotvec, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"expected a (3,) rotation vector, got {v.shape}")
    theta = float(np.linalg.norm(v))
    if theta < 1e-12:
        return np.eye(3)
    kx, ky, kz = v / theta
    k = np.array([[0.0, -kz, ky],
                  [kz, 0.0, -kx],
                  [-ky, kx, 0.0]])
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def sphere_anchor(u: int, v: int, m: int, mode: str = "centered") -> np.ndarray:
    """Unit-sphere direction for pixel (u, v) of an m x m grid.

    ``paper`` mode places pixel (0, 0) at a pole (theta = 2*pi*u/m,
    phi = pi*v/m); ``centered`` mode samples cell centers
    (theta = 2*pi*(u+0.5)/m, phi = pi*(v+0.5)/m) so no anchor repeats.
    """
    if mode not in ANCHOR_MODES:
        raise ValueError(f"unknown anchor mode {mode!r}")
    if m < 1:
        raise ValueError("grid resolution must be positive")
    if not (0 <= u < m and 0 <= v < m):
        raise ValueError(f"pixel ({u}, {v}) out of range for m={m}")
    if mode == "paper":
        theta = 2.0 * np.pi * u / m
        phi = np.pi * v / m
    else:
        theta = 2.0 * np.pi * (u + 0.5) / m
        phi = np.pi * (v + 0.5) / m
    sp = np.sin(phi)
    return np.array([sp * np.cos(theta), sp * np.sin(theta), np.cos(phi)])


def unit_anchor_grid(m: int, mode: str = "centered") -> np.ndarray:
    """All m x m sphere anchors as an (m, m, 3) array indexed [v, u]."""
    if mode not in ANCHOR_MODES:
        raise ValueError(f"unknown anchor mode {mode!r}")
    if m < 1:
        raise ValueError("grid resolution must be positive")
    uu = np.arange(m, dtype=np.float64)[None, :]
    vv = np.arange(m, dtype=np.float64)[:, None]
    if mode == "paper":
        theta = 2.0 * np.pi * uu / m
        phi = np.pi * vv / m
    else:
        theta = 2.0 * np.pi * (uu + 0.5) / m
        phi = np.pi * (vv + 0.5) / m
    sp = np.sin(phi)
    out = np.empty((m, m, 3))
    out[..., 0] = sp * np.cos(theta)
    out[..., 1] = sp * np.sin(theta)
    out[..., 2] = np.broadcast_to(np.cos(phi), (m, m))
    return out


def anchor_world(frame: EllipsoidFrame, unit) -> np.ndarray:
    """Map unit-sphere directions onto the ellipsoid surface in world space.

    ``unit`` may be a single (3,) direction or any (..., 3) stack.
    """
    scaled = np.asarray(unit, dtype=np.float64) * frame.radii
    r = frame.rotation
    c = frame.center
    x, y, z = scaled[..., 0], scaled[..., 1], scaled[..., 2]
    out = np.empty(scaled.shape)
    for j in range(3):
        out[..., j] = x * r[0, j] + y * r[1, j] + z * r[2, j] + c[j]
    return out


def to_local(frame: EllipsoidFrame, points) -> np.ndarray:
    """World positions -> ellipsoid-local unit-ball coordinates.

    Inverse of :func:`anchor_world`: subtract the center, rotate into the
    frame, divide by the radii.  Accepts (3,) or any (..., 3) stack.
    """
    p = np.asarray(points, dtype=np.float64)
    d0 = p[..., 0] - frame.center[0]
    d1 = p[..., 1] - frame.center[1]
    d2 = p[..., 2] - frame.center[2]
    r = frame.rotation
    out = np.empty(p.shape)
    for j in range(3):
        out[..., j] = (d0 * r[j, 0] + d1 * r[j, 1] + d2 * r[j, 2]) / frame.radii[j]
    return out
