"""File formats for joint sequences and cameras.

Joint sequence files are line-delimited, one frame per line:

    frame_index  x0 y0 z0 ... x134 y134 z134  v0 ... v134

i.e. an integer frame index, 135 coordinate triples, then 135 validity
bits (0 or 1), all whitespace-separated (541 fields). Blank lines and
lines starting with '#' are skipped. Frame indices must be strictly
increasing; gaps are reported with a warning but never filled.

Camera files are `key value` pairs, one per line, with exactly the keys
fx, fy, cx, cy, width, height.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from .camera import CameraIntrinsics
from .joints import JointSet3D
from .layout import NUM_JOINTS

_FIELDS_PER_RECORD = 1 + 3 * NUM_JOINTS + NUM_JOINTS


class JointFileError(ValueError):
    """A joint sequence file violated the record grammar."""


class CameraFileError(ValueError):
    """A camera file violated the key-value grammar."""


def load_joint_sequence(path: str | Path) -> list[JointSet3D]:
    """Parse a joint sequence file into per-frame joint sets."""
    path = Path(path)
    frames: list[JointSet3D] = []
    prev_index: int | None = None
    gaps: list[tuple[int, int]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != _FIELDS_PER_RECORD:
                raise JointFileError(
                    f"{path}:{lineno}: expected {_FIELDS_PER_RECORD} fields "
                    f"({NUM_JOINTS} joints), got {len(fields)}"
                )
            try:
                frame_index = int(fields[0])
                coords = np.array(fields[1 : 1 + 3 * NUM_JOINTS], dtype=np.float64)
                bits = [int(v) for v in fields[1 + 3 * NUM_JOINTS :]]
            except ValueError as exc:
                raise JointFileError(f"{path}:{lineno}: {exc}") from exc
            if any(b not in (0, 1) for b in bits):
                raise JointFileError(f"{path}:{lineno}: validity bits must be 0 or 1")
            if prev_index is not None and frame_index <= prev_index:
                raise JointFileError(
                    f"{path}:{lineno}: frame_index {frame_index} not greater "
                    f"than previous {prev_index}"
                )
            if prev_index is not None and frame_index != prev_index + 1:
                gaps.append((prev_index, frame_index))
            prev_index = frame_index
            frames.append(
                JointSet3D(
                    joints=coords.reshape(NUM_JOINTS, 3),
                    valid=np.array(bits, dtype=bool),
                    frame_index=frame_index,
                )
            )
    if gaps:
        described = ", ".join(f"{a}->{b}" for a, b in gaps)
        warnings.warn(f"{path}: frame index gaps (not filled): {described}", stacklevel=2)
    return frames


def save_joint_sequence(path: str | Path, frames: list[JointSet3D]) -> None:
    """Write frames in the line-delimited record format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for f in frames:
            coords = " ".join(f"{v!r}" for v in f.joints.reshape(-1))
            bits = " ".join("1" if v else "0" for v in f.valid)
            fh.write(f"{f.frame_index} {coords} {bits}\n")


_CAMERA_KEYS = ("fx", "fy", "cx", "cy", "width", "height")


def load_camera(path: str | Path) -> CameraIntrinsics:
    """Parse a camera intrinsics file."""
    path = Path(path)
    values: dict[str, float] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise CameraFileError(f"{path}:{lineno}: expected 'key value'")
            key, raw = parts
            if key not in _CAMERA_KEYS:
                raise CameraFileError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise CameraFileError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = float(raw)
            except ValueError as exc:
                raise CameraFileError(f"{path}:{lineno}: bad value for {key!r}: {raw!r}") from exc
    missing = [k for k in _CAMERA_KEYS if k not in values]
    if missing:
        raise CameraFileError(f"{path}: missing keys: {', '.join(missing)}")
    return CameraIntrinsics(
        fx=values["fx"],
        fy=values["fy"],
        cx=values["cx"],
        cy=values["cy"],
        width=int(values["width"]),
        height=int(values["height"]),
    )


def save_camera(path: str | Path, cam: CameraIntrinsics) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for key in _CAMERA_KEYS:
            fh.write(f"{key} {getattr(cam, key)!r}\n")
