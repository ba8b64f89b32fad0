"""Deterministic skeleton-map rasterization.

No anti-aliasing: a pixel is either background (0,0,0) or an exact
table color, so renders are byte-reproducible. Sub-pixel coordinates
are rounded half-away-from-zero before drawing. Edges are painted in
topology order, then joints in slot order; later strokes overwrite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics
from .joints import JointSet2D
from .layout import LimbTopology


@dataclass(frozen=True)
class RenderStyle:
    """Stroke geometry in pixels."""

    line_width: float = 2.0
    point_radius: float = 2.0

    def __post_init__(self):
        if self.line_width < 1 or self.point_radius < 1:
            raise ValueError(
                f"line_width and point_radius must be >= 1, got "
                f"{self.line_width}, {self.point_radius}"
            )


@dataclass
class SkeletonMap:
    """One rasterized RGB conditioning frame."""

    pixels: np.ndarray  # (H, W, 3) uint8
    frame_index: int = 0

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got {self.pixels.shape}")
        if self.pixels.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {self.pixels.dtype}")


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def _paint_disc(img, cx, cy, radius, color):
    h, w = img.shape[:2]
    r_int = int(math.ceil(radius))
    x_lo, x_hi = max(cx - r_int, 0), min(cx + r_int, w - 1)
    y_lo, y_hi = max(cy - r_int, 0), min(cy + r_int, h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
    hit = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2
    img[y_lo : y_hi + 1, x_lo : x_hi + 1][hit] = color


def _paint_segment(img, p0, p1, width, color):
    h, w = img.shape[:2]
    half = width / 2.0
    pad = int(math.ceil(half))
    x_lo = max(min(p0[0], p1[0]) - pad, 0)
    x_hi = min(max(p0[0], p1[0]) + pad, w - 1)
    y_lo = max(min(p0[1], p1[1]) - pad, 0)
    y_hi = min(max(p0[1], p1[1]) + pad, h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
    dx = float(p1[0] - p0[0])
    dy = float(p1[1] - p0[1])
    seg_sq = dx * dx + dy * dy
    if seg_sq == 0.0:
        dist_sq = (xs - p0[0]) ** 2 + (ys - p0[1]) ** 2
    else:
        # distance from pixel centers to the closed segment
        t = ((xs - p0[0]) * dx + (ys - p0[1]) * dy) / seg_sq
        t = np.clip(t, 0.0, 1.0)
        dist_sq = (xs - (p0[0] + t * dx)) ** 2 + (ys - (p0[1] + t * dy)) ** 2
    img[y_lo : y_hi + 1, x_lo : x_hi + 1][dist_sq <= half * half] = color


def rasterize(
    j: JointSet2D,
    topo: LimbTopology,
    cam: CameraIntrinsics,
    style: RenderStyle = RenderStyle(),
    frame_index: int = 0,
) -> SkeletonMap:
    """Draw valid limbs and joints onto a black canvas of the camera size.

    An edge is drawn only when both endpoints are valid; strokes are
    clipped to the image rectangle. An all-invalid joint set yields an
    all-black map.
    """
    img = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
    coords = [
        (round_half_away(u), round_half_away(v)) for u, v in j.points
    ]
    for a, b, color in topo.edges:
        if j.valid[a] and j.valid[b]:
            _paint_segment(img, coords[a], coords[b], style.line_width, color)
    for slot, ok in enumerate(j.valid):
        if ok:
            cx, cy = coords[slot]
            _paint_disc(img, cx, cy, style.point_radius, topo.point_color[slot])
    return SkeletonMap(pixels=img, frame_index=frame_index)
