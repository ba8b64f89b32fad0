"""Perspective camera model and pinhole projection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .joints import JointSet2D, JointSet3D


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixel units."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if not (0 <= self.cx < self.width):
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not (0 <= self.cy < self.height):
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")


def project_perspective(j: JointSet3D, cam: CameraIntrinsics) -> JointSet2D:
    """Project camera-space joints to pixel coordinates.

    u = fx*x/z + cx, v = fy*y/z + cy. Joints behind the camera become
    invalid; points outside the image stay valid (clipping happens at
    rasterization).
    """
    z = j.joints[:, 2]
    in_front = z > 0.0
    safe_z = np.where(in_front, z, 1.0)
    u = cam.fx * j.joints[:, 0] / safe_z + cam.cx
    v = cam.fy * j.joints[:, 1] / safe_z + cam.cy
    points = np.stack([u, v], axis=1)
    return JointSet2D(points=points, valid=j.valid & in_front)


def scale_focal(cam: CameraIntrinsics, s: float) -> CameraIntrinsics:
    """Scale both focal lengths by s, keeping principal point and size.

    Projection under the scaled camera is the affine map
    p -> s*(p - c) + c of the original projection.
    """
    if not s > 0:
        raise ValueError(f"focal scale must be positive, got {s}")
    return replace(cam, fx=cam.fx * s, fy=cam.fy * s)
