"""135-slot joint layout and limb topology.

The layout is a versioned data table and is normative for this project:
slots 0-24 are the 25 body keypoints, 25-45 the left hand (wrist + 5
fingers x 4), 46-66 the right hand, 67-134 the 68 face landmarks
(jaw 0-16, brows 17-26, nose 27-35, eyes 36-47, lips 48-67, indexed
here as face_00..face_67).

Every slot is owned by exactly one label; the inverse mapping is a
bijection. Renderers draw edges first, then joints, in table order.
"""

from __future__ import annotations

from dataclasses import dataclass

LAYOUT_VERSION = "openpose135-v1"

NUM_JOINTS = 135

_BODY_NAMES = [
    "nose", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "mid_hip",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear",
    "left_big_toe", "left_small_toe", "left_heel",
    "right_big_toe", "right_small_toe", "right_heel",
]

_FINGERS = ["thumb", "index", "middle", "ring", "pinky"]


def _hand_names(side):
    names = [f"{side}_hand_wrist"]
    for finger in _FINGERS:
        names += [f"{side}_{finger}_{k}" for k in (1, 2, 3, 4)]
    return names


JOINT_NAMES: tuple[str, ...] = tuple(
    _BODY_NAMES
    + _hand_names("left")
    + _hand_names("right")
    + [f"face_{i:02d}" for i in range(68)]
)

assert len(JOINT_NAMES) == NUM_JOINTS

JOINT_INDEX: dict[str, int] = {name: i for i, name in enumerate(JOINT_NAMES)}

BODY_SLOTS = tuple(range(0, 25))
LEFT_HAND_SLOTS = tuple(range(25, 46))
RIGHT_HAND_SLOTS = tuple(range(46, 67))
FACE_SLOTS = tuple(range(67, 135))

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class LimbTopology:
    """Drawable skeleton structure: colored edges plus per-joint colors."""

    edges: tuple[tuple[int, int, RGB], ...]
    point_color: tuple[RGB, ...]
    version: str = LAYOUT_VERSION

    def __post_init__(self):
        if len(self.point_color) != NUM_JOINTS:
            raise ValueError(
                f"point_color must have {NUM_JOINTS} entries, got {len(self.point_color)}"
            )
        for a, b, _ in self.edges:
            if a == b:
                raise ValueError(f"self-edge at joint {a}")
            if not (0 <= a < NUM_JOINTS and 0 <= b < NUM_JOINTS):
                raise ValueError(f"edge ({a}, {b}) outside [0, {NUM_JOINTS})")


# Body limb palette, rainbow convention used by the usual pose renderers.
_BODY_EDGE_SPECS = [
    ("neck", "mid_hip", (255, 0, 85)),
    ("neck", "right_shoulder", (255, 0, 0)),
    ("neck", "left_shoulder", (255, 85, 0)),
    ("right_shoulder", "right_elbow", (255, 170, 0)),
    ("right_elbow", "right_wrist", (255, 255, 0)),
    ("left_shoulder", "left_elbow", (170, 255, 0)),
    ("left_elbow", "left_wrist", (85, 255, 0)),
    ("mid_hip", "right_hip", (0, 255, 0)),
    ("right_hip", "right_knee", (0, 255, 85)),
    ("right_knee", "right_ankle", (0, 255, 170)),
    ("mid_hip", "left_hip", (0, 255, 255)),
    ("left_hip", "left_knee", (0, 170, 255)),
    ("left_knee", "left_ankle", (0, 85, 255)),
    ("neck", "nose", (0, 0, 255)),
    ("nose", "right_eye", (255, 0, 170)),
    ("right_eye", "right_ear", (170, 0, 255)),
    ("nose", "left_eye", (255, 0, 255)),
    ("left_eye", "left_ear", (85, 0, 255)),
    ("left_ankle", "left_big_toe", (0, 0, 255)),
    ("left_big_toe", "left_small_toe", (0, 0, 255)),
    ("left_ankle", "left_heel", (0, 0, 255)),
    ("right_ankle", "right_big_toe", (0, 255, 255)),
    ("right_big_toe", "right_small_toe", (0, 255, 255)),
    ("right_ankle", "right_heel", (0, 255, 255)),
]

_FINGER_COLORS = {
    "thumb": (255, 0, 102),
    "index": (255, 153, 0),
    "middle": (0, 255, 0),
    "ring": (0, 153, 255),
    "pinky": (153, 0, 255),
}

_FACE_COLOR = (255, 255, 255)

# Face landmark chains in the 68-point order; eyes and lips close their loop.
_FACE_CHAINS = [
    (list(range(0, 17)), False),    # jaw
    (list(range(17, 22)), False),   # right brow
    (list(range(22, 27)), False),   # left brow
    (list(range(27, 31)), False),   # nose bridge
    (list(range(31, 36)), False),   # nose base
    (list(range(36, 42)), True),    # right eye
    (list(range(42, 48)), True),    # left eye
    (list(range(48, 60)), True),    # outer lips
    (list(range(60, 68)), True),    # inner lips
]


def _hand_edges(side):
    wrist = JOINT_INDEX[f"{side}_hand_wrist"]
    edges = []
    for finger in _FINGERS:
        color = _FINGER_COLORS[finger]
        chain = [wrist] + [JOINT_INDEX[f"{side}_{finger}_{k}"] for k in (1, 2, 3, 4)]
        for a, b in zip(chain[:-1], chain[1:]):
            edges.append((a, b, color))
    return edges


def _face_edges():
    edges = []
    for chain, closed in _FACE_CHAINS:
        pts = [JOINT_INDEX[f"face_{i:02d}"] for i in chain]
        pairs = list(zip(pts[:-1], pts[1:]))
        if closed:
            pairs.append((pts[-1], pts[0]))
        for a, b in pairs:
            edges.append((a, b, _FACE_COLOR))
    return edges


def _build_default_topology() -> LimbTopology:
    edges = [
        (JOINT_INDEX[a], JOINT_INDEX[b], color) for a, b, color in _BODY_EDGE_SPECS
    ]
    edges += _hand_edges("left")
    edges += _hand_edges("right")
    edges += _face_edges()

    point_color = [(255, 255, 255)] * NUM_JOINTS
    for a, b, color in edges:
        # first edge touching a joint sets its point color
        if point_color[a] == (255, 255, 255):
            point_color[a] = color
        if point_color[b] == (255, 255, 255):
            point_color[b] = color
    return LimbTopology(edges=tuple(edges), point_color=tuple(point_color))


DEFAULT_TOPOLOGY = _build_default_topology()
