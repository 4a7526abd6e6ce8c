"""Command-line pipelines over the library.

Subcommands cover point prep (concat, voxelize), assignment inspection
(assign), detection post-processing (nms, soft-nms, vote, ensemble),
tracking (track), evaluation (eval-det, eval-mot), and default-config.
Outputs written to --output are byte-deterministic for identical inputs;
run summaries (counts, timings) go to standard output.

Exit codes: 0 success, 2 argument errors, 3 input format or validation
errors, 1 internal failures; every failure prints one line starting with
"ERROR <code>:" on standard error. The LIDARPOST_THREADS environment
variable caps worker parallelism (0 = auto); all current operations run
sequentially, which satisfies any cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence

from .assigner import (
    DEFAULT_K,
    DEFAULT_NEG_THR,
    DEFAULT_POS_THR,
    adaptive_assign,
    fixed_assign,
)
from .ensemble import (
    DEFAULT_NMS_IOU,
    DEFAULT_SOFT_NMS_FLOOR,
    DEFAULT_SOFT_NMS_SIGMA,
    DEFAULT_STOP_DELTA,
    DEFAULT_VOTE_IOU,
    DetectionSet,
    box_vote,
    ensemble_pair,
    nms,
    soft_nms,
)
from .geometry import Box3D, Label
from .io import InputError, ValidationError, read_boxes, read_points, write_boxes, write_points
from .metrics import (
    DEFAULT_IOU_THRESHOLDS,
    Difficulty,
    MatchLedger,
    average_precision,
    match_frame,
    mota_motp,
    pr_points,
    split_difficulty,
)
from .pointcloud import (
    DEFAULT_DELTA,
    DEFAULT_RANGE,
    ROTATION_RANGE,
    SCALE_RANGE,
    RangeSpec,
    concat_frames,
)
from .tracker import Tracker, TrackerConfig
from .voxelizer import VoxelConfig, voxelize_dynamic, voxelize_hard


def thread_cap() -> Optional[int]:
    """Parallelism cap from LIDARPOST_THREADS; None means auto (unset or 0)."""
    raw = os.environ.get("LIDARPOST_THREADS", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return None if value <= 0 else value


def default_config() -> dict:
    """All tunable defaults, one section per module."""
    vox = VoxelConfig()
    track = TrackerConfig()
    return {
        "pointcloud": {
            "range": {
                "x_min": DEFAULT_RANGE.x_min,
                "x_max": DEFAULT_RANGE.x_max,
                "y_min": DEFAULT_RANGE.y_min,
                "y_max": DEFAULT_RANGE.y_max,
                "z_min": DEFAULT_RANGE.z_min,
                "z_max": DEFAULT_RANGE.z_max,
            },
            "delta": DEFAULT_DELTA,
            "scale_range": list(SCALE_RANGE),
            "rotation_range": list(ROTATION_RANGE),
        },
        "voxelizer": {
            "vx": vox.vx,
            "vy": vox.vy,
            "vz": vox.vz,
            "max_points_per_voxel": vox.max_points_per_voxel,
            "max_voxels": vox.max_voxels,
        },
        "assigner": {
            "k": DEFAULT_K,
            "pos_thr": DEFAULT_POS_THR,
            "neg_thr": DEFAULT_NEG_THR,
        },
        "ensemble": {
            "nms_iou": dict(DEFAULT_NMS_IOU),
            "vote_iou": DEFAULT_VOTE_IOU,
            "soft_nms_sigma": DEFAULT_SOFT_NMS_SIGMA,
            "soft_nms_score_floor": DEFAULT_SOFT_NMS_FLOOR,
            "weight_grid": [round(0.1 * i, 1) for i in range(1, 11)],
            "stop_delta": DEFAULT_STOP_DELTA,
        },
        "tracker": {
            "iou_min": track.iou_min,
            "max_age": track.max_age,
            "min_hits": track.min_hits,
            "process_noise": track.process_noise,
            "measurement_noise": track.measurement_noise,
        },
        "metrics": {
            "iou_thr": {label.value: thr for label, thr in DEFAULT_IOU_THRESHOLDS.items()},
            "difficulty": Difficulty.L2.value,
        },
    }


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str]) -> dict:
    config = default_config()
    if path is None:
        return config
    with open(path, "r", encoding="utf-8") as fh:
        user = json.load(fh)
    if not isinstance(user, dict):
        raise ValueError(f"config {path}: expected a JSON object at top level")
    return _deep_merge(config, user)


def _pick(flag, config_value):
    return config_value if flag is None else flag


def _filter_class(boxes: Sequence[Box3D], label: Optional[Label]) -> List[Box3D]:
    if label is None:
        return list(boxes)
    return [b for b in boxes if b.label is label]


def _classwise_nms(
    boxes: Sequence[Box3D], override: Optional[float], iou_map: Dict[str, float]
) -> List[Box3D]:
    """NMS with a per-class threshold map unless a single override is given.

    Kept boxes come back in descending (score, original index) order.
    """
    if override is not None:
        return [boxes[i] for i in nms(boxes, override)]
    kept: List[int] = []
    for label in Label:
        idx = [i for i, b in enumerate(boxes) if b.label is label]
        if not idx:
            continue
        subset = [boxes[i] for i in idx]
        kept.extend(idx[i] for i in nms(subset, iou_map[label.value]))
    kept.sort(key=lambda i: (-boxes[i].score, i))
    return [boxes[i] for i in kept]


def _summary(**fields) -> None:
    print(" ".join(f"{key}={value}" for key, value in fields.items()))


def _write_report(lines: List[str], output: Optional[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_jsonl(records: List[dict], output: str) -> None:
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, allow_nan=False) + "\n")


def cmd_concat(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    delta = _pick(args.delta, config["pointcloud"]["delta"])
    current = read_points(args.current, args.channels, frame_id="current")
    previous = read_points(args.previous, args.channels, frame_id="previous")
    merged = concat_frames(current, previous, delta)
    write_points(merged, args.output, channels=5)
    _summary(
        points_current=len(current),
        points_previous=len(previous),
        points_out=len(merged),
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_voxelize(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    section = config["voxelizer"]
    range_spec = RangeSpec(**config["pointcloud"]["range"])
    vox_config = VoxelConfig(
        range=range_spec,
        vx=_pick(args.vx, section["vx"]),
        vy=_pick(args.vy, section["vy"]),
        vz=_pick(args.vz, section["vz"]),
        max_points_per_voxel=_pick(args.max_points, section["max_points_per_voxel"]),
        max_voxels=_pick(args.max_voxels, section["max_voxels"]),
    )
    cloud = read_points(args.points, args.channels)
    grid = (
        voxelize_hard(cloud, vox_config)
        if args.mode == "hard"
        else voxelize_dynamic(cloud, vox_config)
    )
    summary = {
        "mode": grid.mode.value,
        "grid_shape": list(vox_config.grid_shape),
        "num_voxels": grid.num_voxels,
        "stored_points": grid.stored_points,
        "dropped_points": grid.dropped_points,
        "dropped_voxels": grid.dropped_voxels,
    }
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _summary(
        points_in=len(cloud),
        voxels=grid.num_voxels,
        stored=grid.stored_points,
        dropped_points=grid.dropped_points,
        dropped_voxels=grid.dropped_voxels,
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_assign(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    section = config["assigner"]
    anchors_by_frame = read_boxes(args.anchors)
    gts_by_frame = read_boxes(args.gts)
    label = Label(args.cls) if args.cls else None
    records: List[dict] = []
    anchor_count = 0
    for frame_id, anchor_set in anchors_by_frame.items():
        anchors = _filter_class(anchor_set.boxes, label)
        gt_set = gts_by_frame.get(frame_id)
        gts = _filter_class(gt_set.boxes, label) if gt_set else []
        if not anchors:
            continue
        anchor_count += len(anchors)
        if args.mode == "fixed":
            result = fixed_assign(
                anchors,
                gts,
                _pick(args.pos_thr, section["pos_thr"]),
                _pick(args.neg_thr, section["neg_thr"]),
            )
        else:
            result = adaptive_assign(anchors, gts, _pick(args.k, section["k"]))
        for i, (anchor_label, gt_index) in enumerate(
            zip(result.labels, result.gt_indices)
        ):
            record = {"frame_id": frame_id, "anchor_index": i, "label": anchor_label.value}
            if gt_index is not None:
                record["gt_index"] = gt_index
            records.append(record)
        if result.adaptive_thresholds is not None:
            for j, threshold in enumerate(result.adaptive_thresholds):
                records.append(
                    {"frame_id": frame_id, "gt_index": j, "adaptive_threshold": threshold}
                )
    _write_jsonl(records, args.output)
    _summary(
        frames=len(anchors_by_frame),
        anchors=anchor_count,
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def _run_per_frame_filter(
    args: argparse.Namespace,
    transform: Callable[[List[Box3D], dict], List[Box3D]],
) -> None:
    """Shared frame loop for nms / soft-nms / vote."""
    start = time.perf_counter()
    config = load_config(args.config)
    frames = read_boxes(args.input)
    label = Label(args.cls) if args.cls else None
    boxes_in = 0
    boxes_out = 0
    outputs: List[DetectionSet] = []
    for frame_id, frame in frames.items():
        boxes = _filter_class(frame.boxes, label)
        boxes_in += len(boxes)
        kept = transform(boxes, config)
        boxes_out += len(kept)
        outputs.append(DetectionSet(frame_id, kept, frame.source_id, frame.timestamp))
    write_boxes(outputs, args.output)
    _summary(
        frames=len(frames),
        boxes_in=boxes_in,
        boxes_out=boxes_out,
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_nms(args: argparse.Namespace) -> None:
    def transform(boxes: List[Box3D], config: dict) -> List[Box3D]:
        return _classwise_nms(boxes, args.iou, config["ensemble"]["nms_iou"])

    _run_per_frame_filter(args, transform)


def cmd_soft_nms(args: argparse.Namespace) -> None:
    def transform(boxes: List[Box3D], config: dict) -> List[Box3D]:
        section = config["ensemble"]
        return soft_nms(
            boxes,
            sigma=_pick(args.sigma, section["soft_nms_sigma"]),
            score_floor=_pick(args.floor, section["soft_nms_score_floor"]),
        )

    _run_per_frame_filter(args, transform)


def cmd_vote(args: argparse.Namespace) -> None:
    def transform(boxes: List[Box3D], config: dict) -> List[Box3D]:
        section = config["ensemble"]
        kept = _classwise_nms(boxes, args.nms_iou, section["nms_iou"])
        return box_vote(kept, boxes, _pick(args.vote_iou, section["vote_iou"]))

    _run_per_frame_filter(args, transform)


def _detection_ap(
    det_frames: Dict[str, DetectionSet],
    gt_frames: Dict[str, DetectionSet],
    label: Label,
    iou_thr: float,
    level: Difficulty,
) -> float:
    ledgers: List[MatchLedger] = []
    gt_count = 0
    frame_ids = list(gt_frames)
    frame_ids.extend(fid for fid in det_frames if fid not in gt_frames)
    for frame_id in frame_ids:
        det_set = det_frames.get(frame_id)
        gt_set = gt_frames.get(frame_id)
        dets = _filter_class(det_set.boxes, label) if det_set else []
        gts = split_difficulty(
            _filter_class(gt_set.boxes, label) if gt_set else [], level
        )
        gt_count += len(gts)
        ledgers.append(match_frame(dets, gts, iou_thr))
    ap, _ = average_precision(ledgers, gt_count)
    return ap


def cmd_ensemble(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    section = config["ensemble"]
    if len(args.inputs) < 2:
        raise ValueError("ensemble needs at least two --inputs files")
    if not args.cls:
        raise ValueError("ensemble requires --class to score the merge")
    label = Label(args.cls)
    iou_thr = _pick(args.iou, section["nms_iou"][label.value])
    grid = (
        [float(w) for w in args.grid.split(",")]
        if args.grid
        else list(section["weight_grid"])
    )
    stop_delta = section["stop_delta"]
    metric_iou = config["metrics"]["iou_thr"][label.value]
    level = Difficulty(config["metrics"]["difficulty"])
    gt_frames = read_boxes(args.gt)

    detectors: List[Dict[str, DetectionSet]] = []
    for source_id, path in enumerate(args.inputs):
        frames = read_boxes(path)
        for frame in frames.values():
            frame.source_id = source_id
        detectors.append(frames)

    def score(frames: Dict[str, DetectionSet]) -> float:
        return _detection_ap(frames, gt_frames, label, metric_iou, level)

    def merge_frames(
        fixed: Dict[str, DetectionSet], cand: Dict[str, DetectionSet], weight: float
    ) -> Dict[str, DetectionSet]:
        frame_ids = list(fixed)
        frame_ids.extend(fid for fid in cand if fid not in fixed)
        merged: Dict[str, DetectionSet] = {}
        for fid in frame_ids:
            a = fixed.get(fid)
            b = cand.get(fid)
            if a is None:
                a = DetectionSet(fid, [], 0, b.timestamp)
            if b is None:
                b = DetectionSet(fid, [], 0, a.timestamp)
            merged[fid] = ensemble_pair(a, b, 1.0, weight, iou_thr)
        return merged

    current = detectors[0]
    current_score = score(current)
    steps = [f"detector_0 score={current_score!r}"]
    for index, candidate in enumerate(detectors[1:], start=1):
        best_weight = grid[0]
        best_score = -math.inf
        for weight in grid:
            merged_score = score(merge_frames(current, candidate, weight))
            if merged_score > best_score:
                best_weight = weight
                best_score = merged_score
        if best_score - current_score < stop_delta:
            steps.append(
                f"detector_{index} skipped (best gain "
                f"{best_score - current_score!r} < {stop_delta!r})"
            )
            break
        current = merge_frames(current, candidate, best_weight)
        current_score = best_score
        steps.append(f"detector_{index} weight={best_weight!r} score={best_score!r}")

    write_boxes(current, args.output)
    for step in steps:
        print(step)
    _summary(
        detectors=len(detectors),
        frames=len(current),
        boxes_out=sum(len(s) for s in current.values()),
        score=repr(current_score),
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_track(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    section = config["tracker"]
    tracker_config = TrackerConfig(
        iou_min=_pick(args.iou_min, section["iou_min"]),
        max_age=_pick(args.max_age, section["max_age"]),
        min_hits=_pick(args.min_hits, section["min_hits"]),
        process_noise=section["process_noise"],
        measurement_noise=section["measurement_noise"],
    )
    frames = read_boxes(args.input)
    label = Label(args.cls) if args.cls else None
    tracker = Tracker(tracker_config)
    outputs: List[DetectionSet] = []
    reported = 0
    for frame_id, frame in frames.items():
        detections = DetectionSet(
            frame_id, _filter_class(frame.boxes, label), frame.source_id, frame.timestamp
        )
        try:
            boxes = tracker.step(detections)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        reported += len(boxes)
        outputs.append(DetectionSet(frame_id, boxes, frame.source_id, frame.timestamp))
    write_boxes(outputs, args.output)
    _summary(
        frames=len(frames),
        tracks=tracker.tracks_created,
        reported=reported,
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def _labels_for(args: argparse.Namespace, gt_frames: Dict[str, DetectionSet]) -> List[Label]:
    if args.cls:
        return [Label(args.cls)]
    present = {b.label for frame in gt_frames.values() for b in frame.boxes}
    return [label for label in Label if label in present]


def cmd_eval_det(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    iou_map = config["metrics"]["iou_thr"]
    level = Difficulty(_pick(args.level, config["metrics"]["difficulty"]))
    det_frames = read_boxes(args.detections)
    gt_frames = read_boxes(args.gt)
    labels = _labels_for(args, gt_frames)
    lines: List[str] = []
    csv_lines = ["class,recall,precision,heading_precision"]
    ap_values = []
    aph_values = []
    frame_ids = list(gt_frames)
    frame_ids.extend(fid for fid in det_frames if fid not in gt_frames)
    for label in labels:
        iou_thr = _pick(args.iou, iou_map[label.value])
        ledgers: List[MatchLedger] = []
        gt_count = 0
        det_count = 0
        for frame_id in frame_ids:
            det_set = det_frames.get(frame_id)
            gt_set = gt_frames.get(frame_id)
            dets = _filter_class(det_set.boxes, label) if det_set else []
            gts = split_difficulty(
                _filter_class(gt_set.boxes, label) if gt_set else [], level
            )
            det_count += len(dets)
            gt_count += len(gts)
            ledgers.append(match_frame(dets, gts, iou_thr))
        ap, aph = average_precision(ledgers, gt_count)
        ap_values.append(ap)
        aph_values.append(aph)
        lines.append(f"{label.value}.AP={ap!r}")
        lines.append(f"{label.value}.APH={aph!r}")
        lines.append(f"{label.value}.gt_count={gt_count}")
        lines.append(f"{label.value}.det_count={det_count}")
        for point in pr_points(ledgers, gt_count):
            csv_lines.append(
                f"{label.value},{point.recall!r},{point.precision!r},"
                f"{point.heading_precision!r}"
            )
    if ap_values:
        lines.append(f"mean.AP={sum(ap_values) / len(ap_values)!r}")
        lines.append(f"mean.APH={sum(aph_values) / len(aph_values)!r}")
    lines.append(f"difficulty={level.value}")
    lines.append(f"frames={len(frame_ids)}")
    _write_report(lines, args.output)
    if args.pr_csv:
        _write_report(csv_lines, args.pr_csv)
    _summary(
        frames=len(frame_ids),
        classes=len(labels),
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_eval_mot(args: argparse.Namespace) -> None:
    start = time.perf_counter()
    config = load_config(args.config)
    iou_map = config["metrics"]["iou_thr"]
    tracked_frames = read_boxes(args.tracked)
    gt_frames = read_boxes(args.gt)
    labels = _labels_for(args, gt_frames)
    frame_ids = list(gt_frames)
    frame_ids.extend(fid for fid in tracked_frames if fid not in gt_frames)
    lines: List[str] = []
    for label in labels:
        iou_thr = _pick(args.iou, iou_map[label.value])
        tracked_seq = []
        gt_seq = []
        gt_total = 0
        for frame_id in frame_ids:
            tracked_set = tracked_frames.get(frame_id)
            gt_set = gt_frames.get(frame_id)
            tracked_seq.append(
                _filter_class(tracked_set.boxes, label) if tracked_set else []
            )
            gts = _filter_class(gt_set.boxes, label) if gt_set else []
            gt_total += len(gts)
            gt_seq.append(gts)
        try:
            result = mota_motp(tracked_seq, gt_seq, iou_thr)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        lines.append(f"{label.value}.MOTA={result.mota!r}")
        lines.append(f"{label.value}.MOTP={result.motp!r}")
        lines.append(f"{label.value}.FP={result.fp}")
        lines.append(f"{label.value}.FN={result.fn}")
        lines.append(f"{label.value}.IDS={result.ids}")
        lines.append(f"{label.value}.gt_count={gt_total}")
    lines.append(f"frames={len(frame_ids)}")
    _write_report(lines, args.output)
    _summary(
        frames=len(frame_ids),
        classes=len(labels),
        elapsed_s=f"{time.perf_counter() - start:.3f}",
    )


def cmd_default_config(args: argparse.Namespace) -> None:
    text = json.dumps(default_config(), indent=2, sort_keys=True) + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        print(f"ERROR 2: {message}", file=sys.stderr)
        raise SystemExit(2)


def _add_shared(parser: argparse.ArgumentParser, output_required: bool) -> None:
    parser.add_argument("--config", help="JSON config overriding defaults")
    parser.add_argument(
        "--output", required=output_required, help="output path"
    )
    parser.add_argument(
        "--class",
        dest="cls",
        choices=[label.value for label in Label],
        help="restrict processing to one class",
    )
    parser.add_argument("--seed", type=int, default=0, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lidarpost", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("concat", parents=[], help="concatenate two point frames")
    _add_shared(p, output_required=True)
    p.add_argument("--current", required=True, help="current-frame point file")
    p.add_argument("--previous", required=True, help="previous-frame point file")
    p.add_argument("--channels", type=int, choices=(4, 5), default=4)
    p.add_argument("--delta", type=float, help="time offset tag for previous points")
    p.set_defaults(func=cmd_concat)

    p = sub.add_parser("voxelize", help="voxelize a point file")
    _add_shared(p, output_required=True)
    p.add_argument("--points", required=True, help="input point file")
    p.add_argument("--channels", type=int, choices=(4, 5), default=4)
    p.add_argument("--mode", choices=("hard", "dynamic"), default="dynamic")
    p.add_argument("--vx", type=float)
    p.add_argument("--vy", type=float)
    p.add_argument("--vz", type=float)
    p.add_argument("--max-points", type=int)
    p.add_argument("--max-voxels", type=int)
    p.set_defaults(func=cmd_voxelize)

    p = sub.add_parser("assign", help="assign anchors to ground truths")
    _add_shared(p, output_required=True)
    p.add_argument("--anchors", required=True, help="anchor boxes JSONL")
    p.add_argument("--gts", required=True, help="ground-truth boxes JSONL")
    p.add_argument("--mode", choices=("fixed", "adaptive"), default="adaptive")
    p.add_argument("--k", type=int)
    p.add_argument("--pos-thr", type=float)
    p.add_argument("--neg-thr", type=float)
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("nms", help="non-maximum suppression")
    _add_shared(p, output_required=True)
    p.add_argument("--input", required=True, help="detections JSONL")
    p.add_argument("--iou", type=float, help="single threshold for all classes")
    p.set_defaults(func=cmd_nms)

    p = sub.add_parser("soft-nms", help="score-decaying suppression")
    _add_shared(p, output_required=True)
    p.add_argument("--input", required=True, help="detections JSONL")
    p.add_argument("--sigma", type=float)
    p.add_argument("--floor", type=float)
    p.set_defaults(func=cmd_soft_nms)

    p = sub.add_parser("vote", help="suppress then refine by box voting")
    _add_shared(p, output_required=True)
    p.add_argument("--input", required=True, help="detections JSONL")
    p.add_argument("--nms-iou", type=float)
    p.add_argument("--vote-iou", type=float)
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("ensemble", help="greedy weighted detector merging")
    _add_shared(p, output_required=True)
    p.add_argument("--inputs", nargs="+", required=True, help="detector JSONL files")
    p.add_argument("--gt", required=True, help="ground-truth JSONL for scoring")
    p.add_argument("--iou", type=float, help="merge suppression threshold")
    p.add_argument("--grid", help="comma-separated candidate weights")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("track", help="track detections across frames")
    _add_shared(p, output_required=True)
    p.add_argument("--input", required=True, help="detections JSONL sorted by frame")
    p.add_argument("--iou-min", type=float)
    p.add_argument("--max-age", type=int)
    p.add_argument("--min-hits", type=int)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval-det", help="detection AP / APH report")
    _add_shared(p, output_required=False)
    p.add_argument("--detections", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", type=float, help="override the per-class thresholds")
    p.add_argument("--level", choices=("L1", "L2"))
    p.add_argument("--pr-csv", help="also write PR curve points as CSV")
    p.set_defaults(func=cmd_eval_det)

    p = sub.add_parser("eval-mot", help="tracking MOTA / MOTP report")
    _add_shared(p, output_required=False)
    p.add_argument("--tracked", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", type=float, help="override the per-class thresholds")
    p.set_defaults(func=cmd_eval_mot)

    p = sub.add_parser("default-config", help="print the default configuration")
    _add_shared(p, output_required=False)
    p.set_defaults(func=cmd_default_config)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    if getattr(args, "func", None) is None:
        print("ERROR 2: a subcommand is required", file=sys.stderr)
        return 2
    try:
        args.func(args)
        return 0
    except InputError as exc:
        print(f"ERROR 3: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"ERROR 2: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"ERROR 1: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
