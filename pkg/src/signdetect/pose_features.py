"""Pose landmarks, shoulder normalization, point subsets, and optical-flow features.

A pose frame is a float array of shape ``(137, 3)``: one ``(x, y, confidence)``
row per landmark, laid out body ``[0, 25)``, face ``[25, 95)``, left hand
``[95, 116)``, right hand ``[116, 137)``.  A confidence of zero (or below)
marks the landmark as missing; a missing landmark never contributes motion,
so per-point features are zero on the frame it vanishes and on the frame it
reappears.

The per-frame feature of a point is its speed: the Euclidean displacement
from the previous frame scaled by the frame rate, in pose units per second.
After shoulder normalization the unit is shoulder-widths per second, which
makes the features invariant to camera resolution and distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegeneratePose, LengthMismatch

POINT_COUNT = 137

BODY = slice(0, 25)
FACE = slice(25, 95)
LEFT_HAND = slice(95, 116)
RIGHT_HAND = slice(116, 137)

# Body-25 indices addressed by name.
NOSE = 0
NECK = 1
RIGHT_SHOULDER = 2
RIGHT_ELBOW = 3
RIGHT_WRIST = 4
LEFT_SHOULDER = 5
LEFT_ELBOW = 6
LEFT_WRIST = 7
MID_HIP = 8
RIGHT_HIP = 9
RIGHT_KNEE = 10
RIGHT_ANKLE = 11
LEFT_HIP = 12
LEFT_KNEE = 13
LEFT_ANKLE = 14
RIGHT_EYE = 15
LEFT_EYE = 16
RIGHT_EAR = 17
LEFT_EAR = 18

BODY_POINT_NAMES = [
    "nose", "neck", "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist", "mid_hip", "right_hip",
    "right_knee", "right_ankle", "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear", "left_big_toe",
    "left_small_toe", "left_heel", "right_big_toe", "right_small_toe",
    "right_heel",
]


class BodyPart(Enum):
    """The four landmark groups of a pose frame."""

    FACE = "face"
    BODY = "body"
    LEFT_HAND = "leftHand"
    RIGHT_HAND = "rightHand"

    @property
    def slots(self) -> slice:
        return _PART_SLOTS[self]


_PART_SLOTS = {
    BodyPart.FACE: FACE,
    BodyPart.BODY: BODY,
    BodyPart.LEFT_HAND: LEFT_HAND,
    BodyPart.RIGHT_HAND: RIGHT_HAND,
}

# Feature order of the bounding-box subset: (min, max) corner per part.
BBOX_PARTS = (BodyPart.FACE, BodyPart.BODY, BodyPart.LEFT_HAND, BodyPart.RIGHT_HAND)


class PointSubset(Enum):
    """Which landmarks feed the classifier."""

    POSE_ALL = "pose-all"
    POSE_BODY = "pose-body"
    POSE_HANDS = "pose-hands"
    BBOX = "bbox"

    @property
    def dim(self) -> int:
        return _SUBSET_DIMS[self]

    @classmethod
    def from_name(cls, name: str) -> "PointSubset":
        try:
            return cls(name)
        except ValueError:
            options = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown point subset {name!r} (one of: {options})") from None


_SUBSET_DIMS = {
    PointSubset.POSE_ALL: 137,
    PointSubset.POSE_BODY: 25,
    PointSubset.POSE_HANDS: 42,
    PointSubset.BBOX: 8,
}


class NormalizationMode(Enum):
    """How pose coordinates are rescaled before feature extraction.

    ``PER_SEQUENCE`` divides by the mean shoulder distance of the whole
    sequence (the offline pipeline).  ``TRAILING_WINDOW`` divides by the mean
    over the most recent 50 observed shoulder distances (the live engine).
    """

    PER_SEQUENCE = "per-sequence"
    TRAILING_WINDOW = "trailing-window"


@dataclass
class PoseSequence:
    """An ordered pose stream with its capture rate and origin."""

    frames: np.ndarray  # (T, 137, 3)
    fps: float
    source_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[1:] != (POINT_COUNT, 3):
            raise ValueError(f"frames must have shape (T, {POINT_COUNT}, 3), got {self.frames.shape}")
        if self.frames.shape[0] < 1:
            raise ValueError("a pose sequence needs at least one frame")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return self.frames.shape[0]


def video_id(source_id: str) -> str:
    """Video part of a source id; ids follow the ``video#signer`` convention."""
    return source_id.split("#", 1)[0]


def shoulder_distance(frame: np.ndarray) -> float | None:
    """Euclidean shoulder distance of one frame, or None if a shoulder is missing."""
    left = frame[LEFT_SHOULDER]
    right = frame[RIGHT_SHOULDER]
    if left[2] <= 0 or right[2] <= 0:
        return None
    return float(np.hypot(left[0] - right[0], left[1] - right[1]))


def normalize_sequence(seq: PoseSequence) -> PoseSequence:
    """Rescale coordinates so the mean shoulder distance over the sequence is 1.

    The mean is taken over the frames where both shoulders are present.
    Confidences are untouched.  Raises DegeneratePose when no frame has both
    shoulders or the mean distance is zero.
    """
    frames = seq.frames
    left = frames[:, LEFT_SHOULDER, :]
    right = frames[:, RIGHT_SHOULDER, :]
    defined = (left[:, 2] > 0) & (right[:, 2] > 0)
    if not defined.any():
        raise DegeneratePose("no frame has both shoulders detected")
    dists = np.hypot(left[defined, 0] - right[defined, 0], left[defined, 1] - right[defined, 1])
    mean = float(dists.mean())
    if mean <= 0:
        raise DegeneratePose("mean shoulder distance is zero")
    scaled = frames.copy()
    scaled[:, :, :2] /= mean
    return PoseSequence(scaled, seq.fps, seq.source_id)


def _bbox_corners(frames: np.ndarray, part: BodyPart) -> np.ndarray:
    """(T, 2, 3) min/max corners of one part; corners are missing when the part is."""
    pts = frames[:, part.slots, :]
    present = pts[:, :, 2] > 0
    xy = pts[:, :, :2]
    mins = np.where(present[..., None], xy, np.inf).min(axis=1)
    maxs = np.where(present[..., None], xy, -np.inf).max(axis=1)
    any_present = present.any(axis=1)
    conf = any_present.astype(np.float64)
    mins = np.where(any_present[:, None], mins, 0.0)
    maxs = np.where(any_present[:, None], maxs, 0.0)
    corners = np.empty((frames.shape[0], 2, 3))
    corners[:, 0, :2] = mins
    corners[:, 0, 2] = conf
    corners[:, 1, :2] = maxs
    corners[:, 1, 2] = conf
    return corners


def part_bbox(frame: np.ndarray, part: BodyPart) -> tuple[np.ndarray, np.ndarray]:
    """Min and max corner landmarks of a part over its present points.

    Both corners carry confidence 1; when every landmark of the part is
    missing, both corners are missing (confidence 0).
    """
    corners = _bbox_corners(np.asarray(frame, dtype=np.float64)[None], part)
    return corners[0, 0], corners[0, 1]


def select_sequence_points(frames: np.ndarray, subset: PointSubset) -> np.ndarray:
    """(T, D, 3) landmark selection for every frame at once."""
    frames = np.asarray(frames, dtype=np.float64)
    if subset is PointSubset.POSE_ALL:
        return frames
    if subset is PointSubset.POSE_BODY:
        return frames[:, BODY]
    if subset is PointSubset.POSE_HANDS:
        return np.concatenate([frames[:, LEFT_HAND], frames[:, RIGHT_HAND]], axis=1)
    return np.concatenate([_bbox_corners(frames, p) for p in BBOX_PARTS], axis=1)


def select_points(frame: np.ndarray, subset: PointSubset) -> np.ndarray:
    """(D, 3) landmark selection for a single frame."""
    return select_sequence_points(np.asarray(frame, dtype=np.float64)[None], subset)[0]


def flow_step(prev: np.ndarray, cur: np.ndarray, fps: float) -> np.ndarray:
    """Per-point speed between two selected-point arrays.

    A point missing in either frame yields 0 so that dropped detections never
    read as motion.
    """
    prev = np.asarray(prev, dtype=np.float64)
    cur = np.asarray(cur, dtype=np.float64)
    if prev.shape != cur.shape:
        raise LengthMismatch(f"point arrays disagree: {prev.shape} vs {cur.shape}")
    if not fps > 0:
        raise ValueError(f"fps must be positive, got {fps}")
    delta = cur[:, :2] - prev[:, :2]
    norms = np.sqrt((delta * delta).sum(axis=1)) * fps
    present = (prev[:, 2] > 0) & (cur[:, 2] > 0)
    return np.where(present, norms, 0.0)


def extract_features(seq: PoseSequence, subset: PointSubset) -> np.ndarray:
    """(T, D) feature matrix of per-point speeds; row 0 is all zeros.

    Expects a normalized sequence (see ``normalize_sequence``); bounding boxes
    are computed on the frames as given, so normalizing first keeps the bbox
    features scale-invariant too.
    """
    sel = select_sequence_points(seq.frames, subset)
    count = sel.shape[0]
    features = np.zeros((count, sel.shape[1]))
    if count > 1:
        xy = sel[:, :, :2]
        delta = xy[1:] - xy[:-1]
        norms = np.sqrt((delta * delta).sum(axis=2)) * seq.fps
        present = (sel[1:, :, 2] > 0) & (sel[:-1, :, 2] > 0)
        features[1:] = np.where(present, norms, 0.0)
    return features


def subset_point_names(subset: PointSubset) -> list[str]:
    """Stable display names for the D feature columns of a subset."""
    if subset is PointSubset.POSE_BODY:
        return list(BODY_POINT_NAMES)
    if subset is PointSubset.POSE_ALL:
        return (
            list(BODY_POINT_NAMES)
            + [f"face_{i}" for i in range(70)]
            + [f"left_hand_{i}" for i in range(21)]
            + [f"right_hand_{i}" for i in range(21)]
        )
    if subset is PointSubset.POSE_HANDS:
        return [f"left_hand_{i}" for i in range(21)] + [f"right_hand_{i}" for i in range(21)]
    names = []
    for part in BBOX_PARTS:
        names.append(f"{part.value}_min")
        names.append(f"{part.value}_max")
    return names
