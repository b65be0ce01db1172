"""4x4 homogeneous transforms: composition (Translation * Rotation * Scale)
and application to 3D point sets."""

from __future__ import annotations

import numpy as np

from .errors import SingularTransform, ZeroScale

IDENTITY = np.eye(4, dtype=np.float64)


def rotation_from_axis_angle(rotvec) -> np.ndarray:
    """3x3 rotation from an axis-angle vector (axis * angle, radians).

    Rodrigues formula; the zero vector yields the identity.
    """
    v = np.asarray(rotvec, dtype=np.float64).reshape(3)
    angle = float(np.linalg.norm(v))
    if angle == 0.0:
        return np.eye(3)
    axis = v / angle
    kx, ky, kz = axis
    k = np.array([[0.0, -kz, ky],
                  [kz, 0.0, -kx],
                  [-ky, kx, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def compose_transform(translation=(0.0, 0.0, 0.0),
                      rotation=(0.0, 0.0, 0.0),
                      scale=(1.0, 1.0, 1.0)) -> np.ndarray:
    """Build T = Translation @ Rotation @ Scale as a 4x4 row-major matrix."""
    sx, sy, sz = (float(s) for s in scale)
    if sx == 0.0 or sy == 0.0 or sz == 0.0:
        raise ZeroScale("scale components must be nonzero")
    t = np.eye(4)
    t[:3, 3] = np.asarray(translation, dtype=np.float64).reshape(3)
    r = np.eye(4)
    r[:3, :3] = rotation_from_axis_angle(rotation)
    s = np.diag([sx, sy, sz, 1.0])
    return t @ r @ s


def apply_transform(points, t: np.ndarray) -> np.ndarray:
    """Apply a 4x4 homogeneous transform to an (N, 3) point array."""
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (4, 4):
        raise ValueError("transform must be 4x4")
    if abs(np.linalg.det(t)) < 1e-12:
        raise SingularTransform("transform is not invertible")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    h = np.hstack([pts, np.ones((pts.shape[0], 1))])
    out = h @ t.T
    return out[:, :3] / out[:, 3:4]
