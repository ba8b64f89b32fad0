"""Skeleton pipeline: labeled 3D joints -> projected, rasterized pose maps."""

from .camera import CameraIntrinsics, project_perspective, scale_focal
from .io import (
    CameraFileError,
    JointFileError,
    load_camera,
    load_joint_sequence,
    save_camera,
    save_joint_sequence,
)
from .joints import (
    DuplicateLabelError,
    JointSet2D,
    JointSet3D,
    joint_labels,
    map_to_openpose_config,
)
from .layout import (
    DEFAULT_TOPOLOGY,
    JOINT_INDEX,
    JOINT_NAMES,
    LAYOUT_VERSION,
    NUM_JOINTS,
    LimbTopology,
)
from .raster import RenderStyle, SkeletonMap, rasterize, round_half_away

__all__ = [
    "CameraFileError",
    "CameraIntrinsics",
    "DEFAULT_TOPOLOGY",
    "DuplicateLabelError",
    "JOINT_INDEX",
    "JOINT_NAMES",
    "JointFileError",
    "JointSet2D",
    "JointSet3D",
    "LAYOUT_VERSION",
    "LimbTopology",
    "NUM_JOINTS",
    "RenderStyle",
    "SkeletonMap",
    "joint_labels",
    "load_camera",
    "load_joint_sequence",
    "map_to_openpose_config",
    "project_perspective",
    "rasterize",
    "round_half_away",
    "save_camera",
    "save_joint_sequence",
    "scale_focal",
]
