"""Online 3D multi-object tracking.

Each track carries a 10-dimensional constant-velocity Kalman state
(cx, cy, cz, heading, l, w, h, vx, vy, vz); velocities are in meters per
frame step. Detections are associated to predicted tracks per class with a
Hungarian matching on 1 - IoU, gated at a minimum IoU. Track ids start at 0
and are never reused within a sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ensemble import DetectionSet
from .geometry import Box3D, Label, heading_error, iou3d, wrap_angle

STATE_DIM = 10
OBS_DIM = 7

# Constant-velocity transition and position-only observation matrices.
_F = np.eye(STATE_DIM)
_F[0, 7] = _F[1, 8] = _F[2, 9] = 1.0
_H = np.zeros((OBS_DIM, STATE_DIM))
_H[:OBS_DIM, :OBS_DIM] = np.eye(OBS_DIM)

# Births start with this variance on the unobserved velocity components.
_INITIAL_VELOCITY_VAR = 10.0

# Boxes built from a Kalman mean clamp dimensions here so a drifting filter
# can never produce an invalid box during association.
_MIN_DIM = 1e-3


@dataclass(frozen=True)
class TrackerConfig:
    iou_min: float = 0.1
    max_age: int = 2
    min_hits: int = 3
    process_noise: float = 1.0
    measurement_noise: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.iou_min <= 1.0):
            raise ValueError(f"iou_min must lie in [0, 1], got {self.iou_min!r}")
        if self.max_age < 1:
            raise ValueError(f"max_age must be >= 1, got {self.max_age!r}")
        if self.min_hits < 1:
            raise ValueError(f"min_hits must be >= 1, got {self.min_hits!r}")
        for name in ("process_noise", "measurement_noise"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


DEFAULT_CONFIG = TrackerConfig()


@dataclass
class TrackState:
    """Kalman state plus lifecycle counters for one tracked object."""

    mean: np.ndarray
    covariance: np.ndarray
    id: int
    hits: int = 1
    time_since_update: int = 0
    age: int = 1
    label: Label = Label.VEHICLE

    def __post_init__(self) -> None:
        self.mean = np.array(self.mean, dtype=np.float64)
        self.covariance = np.array(self.covariance, dtype=np.float64)
        if self.mean.shape != (STATE_DIM,):
            raise ValueError(f"mean must have shape ({STATE_DIM},), got {self.mean.shape}")
        if self.covariance.shape != (STATE_DIM, STATE_DIM):
            raise ValueError(
                f"covariance must be {STATE_DIM}x{STATE_DIM}, got {self.covariance.shape}"
            )
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        if self.id < 0:
            raise ValueError(f"id must be non-negative, got {self.id!r}")
        if self.hits < 1:
            raise ValueError(f"hits must be >= 1, got {self.hits!r}")
        if self.time_since_update < 0:
            raise ValueError(f"time_since_update must be >= 0, got {self.time_since_update!r}")
        if self.age < 1:
            raise ValueError(f"age must be >= 1, got {self.age!r}")

    def to_box(self, score: float = 1.0) -> Box3D:
        """Box view of the mean, with dimensions clamped to stay valid."""
        m = self.mean
        return Box3D(
            cx=float(m[0]),
            cy=float(m[1]),
            cz=float(m[2]),
            length=max(float(m[4]), _MIN_DIM),
            width=max(float(m[5]), _MIN_DIM),
            height=max(float(m[6]), _MIN_DIM),
            heading=float(m[3]),
            score=score,
            label=self.label,
            track_id=self.id,
        )


def _process_noise(config: TrackerConfig) -> np.ndarray:
    return config.process_noise * np.eye(STATE_DIM)


def _measurement_noise(config: TrackerConfig) -> np.ndarray:
    return config.measurement_noise * np.eye(OBS_DIM)


def predict(state: TrackState, config: TrackerConfig = DEFAULT_CONFIG) -> TrackState:
    """Advance one frame under the constant-velocity model.

    The mean moves by its velocity; the covariance becomes F P F' + Q. Age
    and time_since_update both increment.
    """
    mean = _F @ state.mean
    cov = _F @ state.covariance @ _F.T + _process_noise(config)
    cov = 0.5 * (cov + cov.T)
    return TrackState(
        mean,
        cov,
        state.id,
        hits=state.hits,
        time_since_update=state.time_since_update + 1,
        age=state.age + 1,
        label=state.label,
    )


def correct_heading_flip(observed: float, reference: float) -> float:
    """Resolve the 180-degree ambiguity of an observed heading.

    When the observed heading is more than pi/2 away from the reference it
    is flipped by pi (then wrapped), since the detector can report either
    end of the box as the front.
    """
    if heading_error(observed, reference) > 0.5 * math.pi:
        return wrap_angle(observed + math.pi)
    return wrap_angle(observed)


def update(
    state: TrackState, det: Box3D, config: TrackerConfig = DEFAULT_CONFIG
) -> TrackState:
    """Kalman correction with a 7-dim observation (cx, cy, cz, heading, l, w, h).

    The observed heading is flip-corrected against the track before the
    residual (whose heading component is wrapped) enters the standard gain
    update; the covariance uses the Joseph form to stay positive-definite.
    """
    heading = correct_heading_flip(det.heading, float(state.mean[3]))
    z = np.array(
        [det.cx, det.cy, det.cz, heading, det.length, det.width, det.height],
        dtype=np.float64,
    )
    residual = z - _H @ state.mean
    residual[3] = wrap_angle(residual[3])
    p = state.covariance
    r = _measurement_noise(config)
    s = _H @ p @ _H.T + r
    gain = np.linalg.solve(s, _H @ p).T
    mean = state.mean + gain @ residual
    mean[3] = wrap_angle(mean[3])
    joseph = np.eye(STATE_DIM) - gain @ _H
    cov = joseph @ p @ joseph.T + gain @ r @ gain.T
    cov = 0.5 * (cov + cov.T)
    return TrackState(
        mean,
        cov,
        state.id,
        hits=state.hits + 1,
        time_since_update=0,
        age=state.age,
        label=state.label,
    )


def _subproblem_cost(cost: np.ndarray, rows: List[int], cols: List[int]) -> float:
    if not rows or not cols:
        return 0.0
    sub = cost[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub)
    return float(sub[r, c].sum())


def hungarian(cost) -> List[Tuple[int, int]]:
    """Minimum-cost matching of min(rows, cols) pairs.

    Among all optimal matchings, returns the one whose per-row assignment
    vector is lexicographically smallest, with unassigned rows sorting after
    every column index. Result pairs are sorted by row.

    Raises:
        ValueError: if the matrix is not 2-D or contains non-finite entries.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.size == 0:
        return []
    if cost.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix entries must be finite")
    n_rows, n_cols = cost.shape
    needed = min(n_rows, n_cols)
    row_ind, col_ind = linear_sum_assignment(cost)
    best_total = float(cost[row_ind, col_ind].sum())
    tol = 1e-9 * max(1.0, abs(best_total))

    # Fix rows in order, taking the smallest column that still completes an
    # optimal matching; skipping the row is the last resort.
    result: List[Tuple[int, int]] = []
    avail = list(range(n_cols))
    fixed_cost = 0.0
    for r in range(n_rows):
        rows_after = list(range(r + 1, n_rows))
        chosen: Optional[int] = None
        for c in avail:
            rest = [x for x in avail if x != c]
            if len(result) + 1 + min(len(rows_after), len(rest)) != needed:
                continue
            total = fixed_cost + cost[r, c] + _subproblem_cost(cost, rows_after, rest)
            if abs(total - best_total) <= tol:
                chosen = c
                break
        if chosen is None:
            # Row stays unassigned; only possible when rows outnumber columns.
            continue
        result.append((r, chosen))
        avail.remove(chosen)
        fixed_cost += float(cost[r, chosen])
    return result


def associate(
    tracks: Sequence[Box3D],
    detections: Sequence[Box3D],
    iou_min: float,
    iou_fn=iou3d,
) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    """Match predicted track boxes to detections, class by class.

    Costs are 1 - IoU; Hungarian matches whose IoU falls below iou_min are
    demoted to unmatched. Returns (matches, unmatched_tracks,
    unmatched_detections); the three outputs partition both input index sets.
    """
    matches: List[Tuple[int, int]] = []
    unmatched_tracks: List[int] = []
    unmatched_dets: List[int] = []
    labels = sorted(
        {b.label for b in tracks} | {b.label for b in detections},
        key=lambda l: l.value,
    )
    for label in labels:
        t_idx = [i for i, b in enumerate(tracks) if b.label is label]
        d_idx = [j for j, b in enumerate(detections) if b.label is label]
        if not t_idx:
            unmatched_dets.extend(d_idx)
            continue
        if not d_idx:
            unmatched_tracks.extend(t_idx)
            continue
        iou = np.array(
            [[iou_fn(tracks[i], detections[j]) for j in d_idx] for i in t_idx]
        )
        matched_t = set()
        matched_d = set()
        for ri, cj in hungarian(1.0 - iou):
            if iou[ri, cj] < iou_min:
                continue
            matches.append((t_idx[ri], d_idx[cj]))
            matched_t.add(ri)
            matched_d.add(cj)
        unmatched_tracks.extend(t_idx[r] for r in range(len(t_idx)) if r not in matched_t)
        unmatched_dets.extend(d_idx[c] for c in range(len(d_idx)) if c not in matched_d)
    matches.sort()
    unmatched_tracks.sort()
    unmatched_dets.sort()
    return matches, unmatched_tracks, unmatched_dets


def _new_track(det: Box3D, track_id: int) -> TrackState:
    mean = np.array(
        [det.cx, det.cy, det.cz, det.heading, det.length, det.width, det.height,
         0.0, 0.0, 0.0],
        dtype=np.float64,
    )
    cov = np.eye(STATE_DIM)
    cov[7, 7] = cov[8, 8] = cov[9, 9] = _INITIAL_VELOCITY_VAR
    return TrackState(mean, cov, track_id, hits=1, time_since_update=0, age=1,
                      label=det.label)


class Tracker:
    """Stateful per-sequence tracker; feed frames in temporal order.

    Each step predicts all tracks, associates, updates the matched ones,
    births tracks from unmatched detections, prunes stale tracks, and
    reports the current frame's confirmed tracks as the matched detection
    boxes stamped with their track ids.
    """

    def __init__(self, config: TrackerConfig = DEFAULT_CONFIG) -> None:
        self.config = config
        self._tracks: List[TrackState] = []
        self._next_id = 0
        self._last_timestamp: Optional[float] = None

    @property
    def tracks(self) -> List[TrackState]:
        return list(self._tracks)

    @property
    def tracks_created(self) -> int:
        """Total ids issued so far (live or dead)."""
        return self._next_id

    def step(self, detections: DetectionSet) -> List[Box3D]:
        """Advance one frame and return the boxes to report, with track ids.

        A track reports when it was updated this frame and is either
        confirmed (hits >= min_hits) or still young (age <= min_hits).

        Raises:
            ValueError: if the frame timestamp precedes the previous one.
        """
        if (
            self._last_timestamp is not None
            and detections.timestamp < self._last_timestamp
        ):
            raise ValueError(
                f"frames must arrive in temporal order: {detections.timestamp!r} "
                f"after {self._last_timestamp!r}"
            )
        self._last_timestamp = detections.timestamp
        cfg = self.config

        states = [predict(t, cfg) for t in self._tracks]
        track_boxes = [s.to_box() for s in states]
        det_boxes = detections.boxes
        matches, _, unmatched_dets = associate(track_boxes, det_boxes, cfg.iou_min)

        reported_det: Dict[int, Box3D] = {}
        for ti, dj in matches:
            states[ti] = update(states[ti], det_boxes[dj], cfg)
            reported_det[states[ti].id] = det_boxes[dj]
        for dj in unmatched_dets:
            state = _new_track(det_boxes[dj], self._next_id)
            self._next_id += 1
            states.append(state)
            reported_det[state.id] = det_boxes[dj]

        self._tracks = [s for s in states if s.time_since_update <= cfg.max_age]

        reported: List[Box3D] = []
        for state in self._tracks:
            if state.time_since_update == 0 and (
                state.hits >= cfg.min_hits or state.age <= cfg.min_hits
            ):
                reported.append(replace(reported_det[state.id], track_id=state.id))
        return reported
