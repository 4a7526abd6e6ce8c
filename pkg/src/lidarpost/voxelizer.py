"""Sparse voxelization of point clouds, in hard (capped) and dynamic modes.

Dynamic mode keeps every in-range point. Hard mode enforces per-voxel and
total-voxel caps in first-arrival order, so drop behavior is reproducible
for a given input ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .pointcloud import DEFAULT_RANGE, PointCloud, RangeSpec, TimedPoint

_INT32_MAX = 2**31 - 1

VoxelKey = Tuple[int, int, int]


@dataclass(frozen=True)
class VoxelConfig:
    """Grid geometry plus the hard-mode caps."""

    range: RangeSpec = DEFAULT_RANGE
    vx: float = 0.1
    vy: float = 0.1
    vz: float = 0.15
    max_points_per_voxel: int = 5
    max_voxels: int = 150000

    def __post_init__(self) -> None:
        for name in ("vx", "vy", "vz"):
            edge = getattr(self, name)
            if not (math.isfinite(edge) and edge > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {edge!r}")
        if self.max_points_per_voxel < 1:
            raise ValueError(
                f"max_points_per_voxel must be >= 1, got {self.max_points_per_voxel!r}"
            )
        if self.max_voxels < 1:
            raise ValueError(f"max_voxels must be >= 1, got {self.max_voxels!r}")
        for dim in self.grid_shape:
            if dim > _INT32_MAX:
                raise ValueError(f"grid dimension {dim} exceeds 32-bit signed range")

    @property
    def grid_shape(self) -> Tuple[int, int, int]:
        r = self.range
        return (
            int(math.ceil((r.x_max - r.x_min) / self.vx)),
            int(math.ceil((r.y_max - r.y_min) / self.vy)),
            int(math.ceil((r.z_max - r.z_min) / self.vz)),
        )


class VoxelMode(Enum):
    HARD = "HARD"
    DYNAMIC = "DYNAMIC"


@dataclass
class Voxel:
    """Points kept in one grid cell plus their mean feature vector."""

    points: List[TimedPoint]
    feature: np.ndarray  # mean of (x, y, z, intensity, t) over kept points

    @property
    def count(self) -> int:
        return len(self.points)


@dataclass
class VoxelGrid:
    """Sparse voxel map keyed by integer (ix, iy, iz) grid coordinates."""

    entries: Dict[VoxelKey, Voxel] = field(default_factory=dict)
    mode: VoxelMode = VoxelMode.DYNAMIC
    dropped_points: int = 0
    dropped_voxels: int = 0

    @property
    def num_voxels(self) -> int:
        return len(self.entries)

    @property
    def stored_points(self) -> int:
        return sum(v.count for v in self.entries.values())


def voxel_index(p: TimedPoint, cfg: VoxelConfig) -> Optional[VoxelKey]:
    """Grid cell of a point, or None when the point is out of range.

    In-range tests use the same closed intervals as range cropping; points
    sitting exactly on an upper bound clamp into the last voxel.
    """
    r = cfg.range
    if not r.contains(p.x, p.y, p.z):
        return None
    nx, ny, nz = cfg.grid_shape
    ix = min(int((p.x - r.x_min) / cfg.vx), nx - 1)
    iy = min(int((p.y - r.y_min) / cfg.vy), ny - 1)
    iz = min(int((p.z - r.z_min) / cfg.vz), nz - 1)
    return ix, iy, iz


def _finalize(
    buckets: Dict[VoxelKey, List[TimedPoint]],
    sums: Dict[VoxelKey, List[float]],
    mode: VoxelMode,
    dropped_points: int,
    dropped_voxels: int,
) -> VoxelGrid:
    entries = {
        key: Voxel(points, np.array(sums[key], dtype=np.float64) / len(points))
        for key, points in buckets.items()
    }
    return VoxelGrid(entries, mode, dropped_points, dropped_voxels)


def voxelize_dynamic(cloud: PointCloud, cfg: VoxelConfig = VoxelConfig()) -> VoxelGrid:
    """Voxelize without caps: every in-range point is stored, none dropped."""
    buckets: Dict[VoxelKey, List[TimedPoint]] = {}
    sums: Dict[VoxelKey, List[float]] = {}
    for p in cloud:
        key = voxel_index(p, cfg)
        if key is None:
            continue
        bucket = buckets.get(key)
        if bucket is None:
            buckets[key] = [p]
            sums[key] = [p.x, p.y, p.z, p.intensity, p.t]
        else:
            bucket.append(p)
            s = sums[key]
            s[0] += p.x
            s[1] += p.y
            s[2] += p.z
            s[3] += p.intensity
            s[4] += p.t
    return _finalize(buckets, sums, VoxelMode.DYNAMIC, 0, 0)


def voxelize_hard(cloud: PointCloud, cfg: VoxelConfig = VoxelConfig()) -> VoxelGrid:
    """Voxelize with caps, first-arrival order.

    A voxel keeps at most max_points_per_voxel points; later arrivals count
    toward dropped_points. Once max_voxels distinct voxels exist, points
    mapping to new voxels are dropped and each refused distinct voxel bumps
    dropped_voxels once. Mean features cover kept points only.
    """
    buckets: Dict[VoxelKey, List[TimedPoint]] = {}
    sums: Dict[VoxelKey, List[float]] = {}
    refused: set = set()
    dropped_points = 0
    for p in cloud:
        key = voxel_index(p, cfg)
        if key is None:
            continue
        bucket = buckets.get(key)
        if bucket is None:
            if key in refused:
                dropped_points += 1
                continue
            if len(buckets) >= cfg.max_voxels:
                refused.add(key)
                dropped_points += 1
                continue
            buckets[key] = [p]
            sums[key] = [p.x, p.y, p.z, p.intensity, p.t]
        elif len(bucket) >= cfg.max_points_per_voxel:
            dropped_points += 1
        else:
            bucket.append(p)
            s = sums[key]
            s[0] += p.x
            s[1] += p.y
            s[2] += p.z
            s[3] += p.intensity
            s[4] += p.t
    return _finalize(buckets, sums, VoxelMode.HARD, dropped_points, len(refused))
