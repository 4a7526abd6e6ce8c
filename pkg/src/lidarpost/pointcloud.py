"""Point-cloud data model, frame concatenation, cropping, and augmentations.

All transforms are pure: they return new clouds and new boxes, never mutate
their inputs, and preserve point order. Multi-frame concatenation tags each
point with a time offset so downstream consumers can tell the frames apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, NamedTuple, Sequence, Tuple

import numpy as np

from .geometry import Box3D, wrap_angle

DEFAULT_DELTA = 0.1
SCALE_RANGE = (0.95, 1.05)
ROTATION_RANGE = (-math.pi / 4.0, math.pi / 4.0)


@dataclass(frozen=True)
class TimedPoint:
    """LiDAR return with intensity and a time-offset channel (0 = current frame)."""

    x: float
    y: float
    z: float
    intensity: float = 0.0
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x", "y", "z", "intensity", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.intensity < 0.0:
            raise ValueError(f"intensity must be non-negative, got {self.intensity!r}")
        if self.t < 0.0:
            raise ValueError(f"t must be non-negative, got {self.t!r}")


@dataclass
class PointCloud:
    """Ordered point collection for one frame (or one concatenated pair)."""

    points: List[TimedPoint] = field(default_factory=list)
    frame_id: str = ""
    timestamp: float = 0.0

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[TimedPoint]:
        return iter(self.points)

    def to_array(self) -> np.ndarray:
        """Points as an (N, 5) float64 array of (x, y, z, intensity, t)."""
        if not self.points:
            return np.zeros((0, 5), dtype=np.float64)
        return np.array(
            [(p.x, p.y, p.z, p.intensity, p.t) for p in self.points], dtype=np.float64
        )

    @classmethod
    def from_array(
        cls, array: np.ndarray, frame_id: str = "", timestamp: float = 0.0
    ) -> "PointCloud":
        """Build a cloud from an (N, 4) or (N, 5) array; 4 columns imply t = 0."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2 or array.shape[1] not in (4, 5):
            raise ValueError(f"expected an (N, 4) or (N, 5) array, got shape {array.shape}")
        points = []
        for row in array:
            t = float(row[4]) if array.shape[1] == 5 else 0.0
            points.append(TimedPoint(float(row[0]), float(row[1]), float(row[2]), float(row[3]), t))
        return cls(points, frame_id, timestamp)


@dataclass(frozen=True)
class RangeSpec:
    """Closed axis-aligned crop bounds, min < max on every axis."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float

    def __post_init__(self) -> None:
        for lo, hi in (("x_min", "x_max"), ("y_min", "y_max"), ("z_min", "z_max")):
            lo_v, hi_v = getattr(self, lo), getattr(self, hi)
            if not (math.isfinite(lo_v) and math.isfinite(hi_v) and lo_v < hi_v):
                raise ValueError(f"require finite {lo} < {hi}, got {lo_v!r}, {hi_v!r}")

    def contains(self, x: float, y: float, z: float) -> bool:
        return (
            self.x_min <= x <= self.x_max
            and self.y_min <= y <= self.y_max
            and self.z_min <= z <= self.z_max
        )


DEFAULT_RANGE = RangeSpec(-75.2, 75.2, -75.2, 75.2, -2.0, 4.0)


class Axis(Enum):
    X = "X"
    Y = "Y"


def concat_frames(
    current: PointCloud, previous: PointCloud, delta: float = DEFAULT_DELTA
) -> PointCloud:
    """Concatenate the current frame with the previous one.

    Current points get t = 0, previous points t = delta, preserving order
    within each source. The previous frame must already be expressed in the
    current frame's coordinate system; ego-motion compensation is the
    caller's responsibility.

    Raises:
        ValueError: if delta is not a positive finite number.
    """
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be positive and finite, got {delta!r}")
    points = [replace(p, t=0.0) for p in current.points]
    points.extend(replace(p, t=delta) for p in previous.points)
    return PointCloud(points, current.frame_id, current.timestamp)


def crop_range(cloud: PointCloud, range_spec: RangeSpec = DEFAULT_RANGE) -> PointCloud:
    """Keep exactly the points inside the closed bounds, order preserved."""
    kept = [p for p in cloud.points if range_spec.contains(p.x, p.y, p.z)]
    return PointCloud(kept, cloud.frame_id, cloud.timestamp)


def flip(
    cloud: PointCloud, boxes: Sequence[Box3D], axis: Axis
) -> Tuple[PointCloud, List[Box3D]]:
    """Mirror points and boxes across the x-axis (Axis.X) or y-axis (Axis.Y).

    Axis.X negates y and the heading; Axis.Y negates x and maps the heading
    to pi - heading. Dimensions, scores, and labels are unchanged.
    """
    if axis is Axis.X:
        points = [replace(p, y=-p.y) for p in cloud.points]
        flipped = [
            replace(b, cy=-b.cy, heading=wrap_angle(-b.heading)) for b in boxes
        ]
    elif axis is Axis.Y:
        points = [replace(p, x=-p.x) for p in cloud.points]
        flipped = [
            replace(b, cx=-b.cx, heading=wrap_angle(math.pi - b.heading)) for b in boxes
        ]
    else:
        raise ValueError(f"axis must be Axis.X or Axis.Y, got {axis!r}")
    return PointCloud(points, cloud.frame_id, cloud.timestamp), flipped


def global_scale(
    cloud: PointCloud, boxes: Sequence[Box3D], factor: float
) -> Tuple[PointCloud, List[Box3D]]:
    """Scale point coordinates, box centers, and box dimensions by factor.

    Headings, time offsets, intensities, scores, and labels are unchanged.

    Raises:
        ValueError: if factor is not a positive finite number.
    """
    if not (math.isfinite(factor) and factor > 0.0):
        raise ValueError(f"factor must be positive and finite, got {factor!r}")
    points = [
        replace(p, x=p.x * factor, y=p.y * factor, z=p.z * factor) for p in cloud.points
    ]
    scaled = [
        replace(
            b,
            cx=b.cx * factor,
            cy=b.cy * factor,
            cz=b.cz * factor,
            length=b.length * factor,
            width=b.width * factor,
            height=b.height * factor,
        )
        for b in boxes
    ]
    return PointCloud(points, cloud.frame_id, cloud.timestamp), scaled


def global_rotate(
    cloud: PointCloud, boxes: Sequence[Box3D], angle: float
) -> Tuple[PointCloud, List[Box3D]]:
    """Rotate points and boxes about +z by angle; z coordinates are unchanged."""
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    c = math.cos(angle)
    s = math.sin(angle)
    points = [
        replace(p, x=c * p.x - s * p.y, y=s * p.x + c * p.y) for p in cloud.points
    ]
    rotated = [
        replace(
            b,
            cx=c * b.cx - s * b.cy,
            cy=s * b.cx + c * b.cy,
            heading=wrap_angle(b.heading + angle),
        )
        for b in boxes
    ]
    return PointCloud(points, cloud.frame_id, cloud.timestamp), rotated


class AugmentationSample(NamedTuple):
    flip_x: bool
    flip_y: bool
    scale: float
    angle: float


def sample_augmentation(seed: int) -> AugmentationSample:
    """Draw one augmentation parameter set, deterministic in the seed.

    Each flip fires with probability 0.5, scale is uniform in [0.95, 1.05],
    angle uniform in [-pi/4, pi/4].
    """
    rng = np.random.default_rng(seed)
    flip_x = bool(rng.random() < 0.5)
    flip_y = bool(rng.random() < 0.5)
    scale = float(rng.uniform(SCALE_RANGE[0], SCALE_RANGE[1]))
    angle = float(rng.uniform(ROTATION_RANGE[0], ROTATION_RANGE[1]))
    return AugmentationSample(flip_x, flip_y, scale, angle)
