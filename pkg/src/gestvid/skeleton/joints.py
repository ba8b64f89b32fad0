"""Joint set containers and label-based ingestion.

3D joints live in camera space (meters, z along the optical axis);
2D points are pixel coordinates. Validity flags travel with the data:
a 3D joint at or behind the camera plane (z <= 0) is never valid.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .layout import JOINT_INDEX, JOINT_NAMES, NUM_JOINTS


@dataclass
class JointSet3D:
    """135 camera-space joints for one frame, with validity flags.

    Joints with z <= 0 are coerced to valid=False on construction.
    """

    joints: np.ndarray  # (135, 3) float64
    valid: np.ndarray   # (135,) bool
    frame_index: int = 0

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool).copy()
        if self.joints.shape != (NUM_JOINTS, 3):
            raise ValueError(
                f"joints must have shape ({NUM_JOINTS}, 3), got {self.joints.shape}"
            )
        if self.valid.shape != (NUM_JOINTS,):
            raise ValueError(
                f"valid must have shape ({NUM_JOINTS},), got {self.valid.shape}"
            )
        self.valid &= self.joints[:, 2] > 0.0


@dataclass
class JointSet2D:
    """135 projected image-plane points in pixels, with validity flags."""

    points: np.ndarray  # (135, 2) float64
    valid: np.ndarray   # (135,) bool

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.points.shape != (NUM_JOINTS, 2):
            raise ValueError(
                f"points must have shape ({NUM_JOINTS}, 2), got {self.points.shape}"
            )
        if self.valid.shape != (NUM_JOINTS,):
            raise ValueError(
                f"valid must have shape ({NUM_JOINTS},), got {self.valid.shape}"
            )


class DuplicateLabelError(ValueError):
    """A joint label appeared more than once in the input."""


def map_to_openpose_config(
    raw_joints: Mapping[str, tuple[float, float, float]]
    | Iterable[tuple[str, tuple[float, float, float]]],
    frame_index: int = 0,
) -> JointSet3D:
    """Reorder named 3D joints into the fixed 135-slot layout.

    Labels absent from the input leave their slot invalid; labels not in
    the layout are ignored with a warning. Positions are copied verbatim.

    Raises:
        DuplicateLabelError: a label occurs twice in the input.
    """
    if isinstance(raw_joints, Mapping):
        items = list(raw_joints.items())
    else:
        items = list(raw_joints)

    joints = np.zeros((NUM_JOINTS, 3), dtype=np.float64)
    valid = np.zeros(NUM_JOINTS, dtype=bool)
    seen: set[str] = set()
    unknown: list[str] = []
    for name, pos in items:
        if name in seen:
            raise DuplicateLabelError(f"duplicate joint label {name!r}")
        seen.add(name)
        slot = JOINT_INDEX.get(name)
        if slot is None:
            unknown.append(name)
            continue
        joints[slot] = np.asarray(pos, dtype=np.float64)
        valid[slot] = True
    if unknown:
        warnings.warn(
            f"ignoring {len(unknown)} unknown joint label(s): {', '.join(sorted(unknown))}",
            stacklevel=2,
        )
    return JointSet3D(joints=joints, valid=valid, frame_index=frame_index)


def joint_labels() -> tuple[str, ...]:
    """The full ordered label table (slot i is produced by label i)."""
    return JOINT_NAMES
