"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written with different algorithms or data
layouts than the package code: Monte-Carlo IoU instead of polygon clipping,
a mark-suppressed NMS scan instead of check-against-kept, exhaustive
enumeration instead of the assignment solver, and a naive quadratic PR
integration instead of the vectorized envelope.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from lidarpost.geometry import Box3D, Label


def random_box(
    rng: np.random.Generator,
    span: float = 5.0,
    label: Label = Label.VEHICLE,
    score: Optional[float] = None,
) -> Box3D:
    return Box3D(
        cx=float(rng.uniform(-span, span)),
        cy=float(rng.uniform(-span, span)),
        cz=float(rng.uniform(-1.0, 1.0)),
        length=float(rng.uniform(0.5, 4.0)),
        width=float(rng.uniform(0.5, 4.0)),
        height=float(rng.uniform(0.5, 3.0)),
        heading=float(rng.uniform(-math.pi, math.pi)),
        score=float(rng.uniform(0.0, 1.0)) if score is None else score,
        label=label,
    )


def contains_xy(box: Box3D, points: np.ndarray) -> np.ndarray:
    """Vectorized point-in-rotated-rectangle test for an (N, 2) array."""
    c = math.cos(box.heading)
    s = math.sin(box.heading)
    dx = points[:, 0] - box.cx
    dy = points[:, 1] - box.cy
    local_x = c * dx + s * dy
    local_y = -s * dx + c * dy
    return (np.abs(local_x) <= 0.5 * box.length) & (np.abs(local_y) <= 0.5 * box.width)


def footprint_corners(box: Box3D) -> np.ndarray:
    c = math.cos(box.heading)
    s = math.sin(box.heading)
    hl, hw = 0.5 * box.length, 0.5 * box.width
    local = np.array([(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)])
    rot = np.array([(c, -s), (s, c)])
    return local @ rot.T + np.array([box.cx, box.cy])


def mc_bev_iou(
    a: Box3D, b: Box3D, rng: np.random.Generator, samples: int = 10**6
) -> float:
    """Monte-Carlo BEV IoU: uniform samples over the joint bounding box."""
    corners = np.vstack([footprint_corners(a), footprint_corners(b)])
    lo = corners.min(axis=0)
    hi = corners.max(axis=0)
    points = rng.uniform(lo, hi, size=(samples, 2))
    in_a = contains_xy(a, points)
    in_b = contains_xy(b, points)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


def reference_nms(boxes: Sequence[Box3D], iou_thr: float, iou_fn) -> List[int]:
    """Quadratic mark-suppressed NMS scan (class-wise, strict-below keeps)."""
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].score, i))
    suppressed = [False] * len(boxes)
    keep: List[int] = []
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        keep.append(i)
        for j in order[pos + 1 :]:
            if suppressed[j] or boxes[j].label is not boxes[i].label:
                continue
            if iou_fn(boxes[i], boxes[j]) >= iou_thr:
                suppressed[j] = True
    return keep


def assignment_vectors(
    rows: int, cols: int
) -> Iterable[Tuple[Optional[int], ...]]:
    """All complete matchings as per-row column vectors, in lexicographic
    order with the unassigned sentinel (None) sorting after every column."""
    needed = min(rows, cols)

    def rec(row: int, used: frozenset, vec: Tuple, matched: int):
        if row == rows:
            if matched == needed:
                yield vec
            return
        rows_left = rows - row - 1
        for c in range(cols):
            if c in used:
                continue
            if matched + 1 + min(rows_left, cols - len(used) - 1) >= needed:
                yield from rec(row + 1, used | {c}, vec + (c,), matched + 1)
        if matched + min(rows_left, cols - len(used)) >= needed:
            yield from rec(row + 1, used, vec + (None,), matched)

    yield from rec(0, frozenset(), (), 0)


def brute_force_assignment(cost: np.ndarray) -> Tuple[List[Tuple[int, int]], float]:
    """Exhaustive minimum-cost matching; first optimum found is the
    lexicographically smallest assignment vector."""
    cost = np.asarray(cost, dtype=np.float64)
    rows, cols = cost.shape
    best_vec: Optional[Tuple[Optional[int], ...]] = None
    best_total = math.inf
    for vec in assignment_vectors(rows, cols):
        total = sum(cost[r, c] for r, c in enumerate(vec) if c is not None)
        if total < best_total - 1e-12:
            best_total = total
            best_vec = vec
    assert best_vec is not None
    pairs = [(r, c) for r, c in enumerate(best_vec) if c is not None]
    return pairs, float(best_total)


def reference_ap(outcomes: Sequence[Tuple[float, bool]], gt_count: int) -> float:
    """Naive all-point PR integration over (score, is_tp) pairs."""
    ordered = sorted(outcomes, key=lambda o: -o[0])
    if gt_count == 0:
        return 1.0 if not ordered else 0.0
    if not ordered:
        return 0.0
    precisions: List[float] = []
    recalls: List[float] = []
    tp = 0
    for rank, (_, is_tp) in enumerate(ordered, start=1):
        tp += int(is_tp)
        precisions.append(tp / rank)
        recalls.append(tp / gt_count)
    ap = 0.0
    prev_recall = 0.0
    for i in range(len(ordered)):
        ap += (recalls[i] - prev_recall) * max(precisions[i:])
        prev_recall = recalls[i]
    return ap
