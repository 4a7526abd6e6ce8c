"""Oriented 3D boxes and the rotated-overlap primitives built on them.

Boxes live in a right-handed frame: x forward, y left, z up. A box heading is
the yaw of its length axis about +z, zero along +x, and is always stored
wrapped to (-pi, pi]. The box center sits at mid-height, so the vertical
extent is [cz - h/2, cz + h/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

_TAU = 2.0 * math.pi

# Clipped footprints smaller than this are floating-point slivers, not overlap.
_AREA_EPS = 1e-12


class Label(Enum):
    """Object classes scored by the detection and tracking pipelines."""

    VEHICLE = "VEHICLE"
    PEDESTRIAN = "PEDESTRIAN"
    CYCLIST = "CYCLIST"


def wrap_angle(theta: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi].

    Raises:
        ValueError: if theta is NaN or infinite.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = theta - _TAU * math.floor((theta + math.pi) / _TAU)
    if wrapped <= -math.pi:  # floor form yields [-pi, pi); move the closed end
        wrapped += _TAU
    return wrapped


def heading_error(a: float, b: float) -> float:
    """Smallest absolute difference between two angles, in [0, pi]."""
    return abs(wrap_angle(a - b))


@dataclass
class Box3D:
    """Oriented 3D bounding box with detection metadata.

    ``length`` runs along the heading direction, ``width`` across it in the
    horizontal plane, ``height`` along z. The heading is wrapped to
    (-pi, pi] on construction.
    """

    cx: float
    cy: float
    cz: float
    length: float
    width: float
    height: float
    heading: float
    score: float = 1.0
    label: Label = Label.VEHICLE
    track_id: Optional[int] = None
    difficulty: Optional[int] = None
    num_points: Optional[int] = None
    source_id: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "cz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        for name in ("length", "width", "height"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score!r}")
        if not isinstance(self.label, Label):
            raise ValueError(f"label must be a Label member, got {self.label!r}")
        if self.track_id is not None and self.track_id < 0:
            raise ValueError(f"track_id must be non-negative, got {self.track_id!r}")
        if self.difficulty is not None and self.difficulty not in (1, 2):
            raise ValueError(f"difficulty must be 1 or 2, got {self.difficulty!r}")
        if self.num_points is not None and self.num_points < 0:
            raise ValueError(f"num_points must be non-negative, got {self.num_points!r}")
        self.heading = wrap_angle(self.heading)

    @property
    def z_min(self) -> float:
        return self.cz - 0.5 * self.height

    @property
    def z_max(self) -> float:
        return self.cz + 0.5 * self.height

    @property
    def bev_area(self) -> float:
        return self.length * self.width

    @property
    def volume(self) -> float:
        return self.length * self.width * self.height

    def corners_bev(self) -> List[Tuple[float, float]]:
        """Footprint corners in the x-y plane, counterclockwise order."""
        c = math.cos(self.heading)
        s = math.sin(self.heading)
        hl = 0.5 * self.length
        hw = 0.5 * self.width
        return [
            (self.cx + c * hl - s * hw, self.cy + s * hl + c * hw),
            (self.cx - c * hl - s * hw, self.cy - s * hl + c * hw),
            (self.cx - c * hl + s * hw, self.cy - s * hl - c * hw),
            (self.cx + c * hl + s * hw, self.cy + s * hl - c * hw),
        ]

    def contains_bev(self, x: float, y: float) -> bool:
        """Whether the point (x, y) lies inside the footprint (boundary inclusive)."""
        c = math.cos(self.heading)
        s = math.sin(self.heading)
        dx = x - self.cx
        dy = y - self.cy
        local_x = c * dx + s * dy
        local_y = -s * dx + c * dy
        return abs(local_x) <= 0.5 * self.length and abs(local_y) <= 0.5 * self.width


def polygon_area(vertices: Sequence[Tuple[float, float]]) -> float:
    """Shoelace area of a simple polygon, positive for counterclockwise order."""
    n = len(vertices)
    if n < 3:
        return 0.0
    acc = 0.0
    px, py = vertices[-1]
    for qx, qy in vertices:
        acc += px * qy - qx * py
        px, py = qx, qy
    return 0.5 * acc


def clip_convex(
    subject: Sequence[Tuple[float, float]], clip: Sequence[Tuple[float, float]]
) -> List[Tuple[float, float]]:
    """Clip one convex counterclockwise polygon by another (Sutherland-Hodgman).

    Returns the vertices of the intersection polygon; empty when the two
    polygons are disjoint.
    """
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            break
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex = bx - ax
        ey = by - ay
        polygon = output
        output = []
        sx, sy = polygon[-1]
        s_side = ex * (sy - ay) - ey * (sx - ax)
        for px, py in polygon:
            p_side = ex * (py - ay) - ey * (px - ax)
            if p_side >= 0.0:
                if s_side < 0.0:
                    t = s_side / (s_side - p_side)
                    output.append((sx + t * (px - sx), sy + t * (py - sy)))
                output.append((px, py))
            elif s_side >= 0.0:
                t = s_side / (s_side - p_side)
                output.append((sx + t * (px - sx), sy + t * (py - sy)))
            sx, sy, s_side = px, py, p_side
    return output


def _footprint_intersection(a: Box3D, b: Box3D) -> float:
    """Overlap area of two box footprints; 0 for slivers below 1e-12 m^2."""
    # Cheap reject: centers farther apart than the summed half-diagonals.
    ra = 0.5 * math.hypot(a.length, a.width)
    rb = 0.5 * math.hypot(b.length, b.width)
    dx = a.cx - b.cx
    dy = a.cy - b.cy
    if dx * dx + dy * dy > (ra + rb) * (ra + rb):
        return 0.0
    overlap = clip_convex(a.corners_bev(), b.corners_bev())
    area = polygon_area(overlap)
    if area < _AREA_EPS:
        return 0.0
    return area


def bev_iou(a: Box3D, b: Box3D) -> float:
    """Intersection-over-union of the two heading-rotated footprints.

    Symmetric; always in [0, 1]. Heights and vertical positions are ignored.
    """
    inter = _footprint_intersection(a, b)
    if inter == 0.0:
        return 0.0
    union = a.bev_area + b.bev_area - inter
    if union < _AREA_EPS:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def iou3d(a: Box3D, b: Box3D) -> float:
    """3D intersection-over-union: rotated footprint overlap times z overlap.

    Symmetric; 0 whenever the vertical intervals or the footprints are
    disjoint. Equals :func:`bev_iou` when both boxes share the same z-center
    and height.
    """
    z_overlap = min(a.z_max, b.z_max) - max(a.z_min, b.z_min)
    if z_overlap <= 0.0:
        return 0.0
    inter_bev = _footprint_intersection(a, b)
    if inter_bev == 0.0:
        return 0.0
    inter = inter_bev * z_overlap
    union = a.volume + b.volume - inter
    if union < _AREA_EPS:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)
