import json
import math
import struct

import pytest

from lidarpost.cli import default_config, run, thread_cap
from lidarpost.io import read_boxes, read_points
from lidarpost.voxelizer import VoxelConfig


def _record(frame_id="f0", timestamp=0.0, cx=1.0, cy=2.0, cz=0.5, l=4.0, w=2.0,
            h=1.5, heading=0.1, score=0.9, label="VEHICLE", **extra):
    record = dict(frame_id=frame_id, timestamp=timestamp, cx=cx, cy=cy, cz=cz,
                  l=l, w=w, h=h, heading=heading, score=score, label=label)
    record.update(extra)
    return record


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def _write_points(path, rows, channels=4):
    with open(path, "wb") as fh:
        for row in rows:
            fh.write(struct.pack(f"<{channels}f", *row))


class TestArgumentErrors:
    def test_no_subcommand(self, capsys):
        assert run([]) == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_missing_required_flag(self, capsys):
        assert run(["nms"]) == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_invalid_class_choice(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [_record()])
        code = run(["nms", "--input", str(det), "--output",
                    str(tmp_path / "o.jsonl"), "--class", "BICYCLE"])
        assert code == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "usage" in capsys.readouterr().out.lower()

    def test_missing_input_file(self, tmp_path, capsys):
        code = run(["nms", "--input", str(tmp_path / "absent.jsonl"),
                    "--output", str(tmp_path / "o.jsonl")])
        assert code == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_invalid_config_json(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [_record()])
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code = run(["nms", "--input", str(det), "--config", str(cfg),
                    "--output", str(tmp_path / "o.jsonl")])
        assert code == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_config_must_be_object(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [_record()])
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        code = run(["nms", "--input", str(det), "--config", str(cfg),
                    "--output", str(tmp_path / "o.jsonl")])
        assert code == 2
        assert "object" in capsys.readouterr().err

    def test_malformed_input_is_exit_3(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        det.write_text(json.dumps(_record()) + "\n{broken\n")
        code = run(["nms", "--input", str(det),
                    "--output", str(tmp_path / "o.jsonl")])
        assert code == 3
        err = capsys.readouterr().err
        assert err.startswith("ERROR 3:")
        assert "line 2" in err


class TestNms:
    def _three_box_file(self, path):
        _write_jsonl(path, [
            _record(cx=0.0, cy=0.0, heading=0.0, score=0.9),
            _record(cx=0.5, cy=0.0, heading=0.0, score=0.8),
            _record(cx=30.0, cy=0.0, heading=0.0, score=0.7),
        ])

    def test_overlap_suppressed(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        self._three_box_file(det)
        out = tmp_path / "o.jsonl"
        assert run(["nms", "--input", str(det), "--output", str(out),
                    "--iou", "0.5"]) == 0
        stdout = capsys.readouterr().out
        assert "boxes_in=3" in stdout
        assert "boxes_out=2" in stdout
        kept = read_boxes(out)["f0"].boxes
        assert [b.cx for b in kept] == [0.0, 30.0]
        assert [b.score for b in kept] == [0.9, 0.7]

    def test_class_filter(self, tmp_path):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(cx=0.0, label="VEHICLE"),
            _record(cx=30.0, label="PEDESTRIAN", l=0.9, w=0.8),
        ])
        out = tmp_path / "o.jsonl"
        assert run(["nms", "--input", str(det), "--output", str(out),
                    "--class", "VEHICLE"]) == 0
        kept = read_boxes(out)["f0"].boxes
        assert len(kept) == 1
        assert kept[0].label.value == "VEHICLE"

    def test_per_class_defaults_apply_without_override(self, tmp_path):
        # IoU of the shifted pair is 7/9 ~ 0.778: above the 0.7 vehicle
        # threshold, so the second box goes even with no --iou flag.
        det = tmp_path / "d.jsonl"
        self._three_box_file(det)
        out = tmp_path / "o.jsonl"
        assert run(["nms", "--input", str(det), "--output", str(out)]) == 0
        assert len(read_boxes(out)["f0"].boxes) == 2

    def test_output_bytes_deterministic(self, tmp_path):
        det = tmp_path / "d.jsonl"
        self._three_box_file(det)
        out_a = tmp_path / "a.jsonl"
        out_b = tmp_path / "b.jsonl"
        assert run(["nms", "--input", str(det), "--output", str(out_a)]) == 0
        assert run(["nms", "--input", str(det), "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()


class TestSoftNmsAndVote:
    def test_soft_nms_disjoint_scores_untouched(self, tmp_path):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(cx=0.0, score=0.9),
            _record(cx=30.0, score=0.8),
        ])
        out = tmp_path / "o.jsonl"
        assert run(["soft-nms", "--input", str(det), "--output", str(out)]) == 0
        assert [b.score for b in read_boxes(out)["f0"].boxes] == [0.9, 0.8]

    def test_soft_nms_decays_overlap(self, tmp_path):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(cx=0.0, cy=0.0, heading=0.0, score=0.9),
            _record(cx=0.5, cy=0.0, heading=0.0, score=0.8),
        ])
        out = tmp_path / "o.jsonl"
        assert run(["soft-nms", "--input", str(det), "--output", str(out),
                    "--sigma", "0.5"]) == 0
        boxes = read_boxes(out)["f0"].boxes
        assert boxes[0].score == 0.9
        iou = 7.0 / 9.0
        assert boxes[1].score == pytest.approx(
            0.8 * math.exp(-(iou * iou) / 0.5), abs=1e-12
        )

    def test_vote_refines_kept_box(self, tmp_path):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(cx=0.0, cy=0.0, heading=0.0, score=0.9),
            _record(cx=0.5, cy=0.0, heading=0.0, score=0.8),
        ])
        out = tmp_path / "o.jsonl"
        assert run(["vote", "--input", str(det), "--output", str(out),
                    "--nms-iou", "0.5", "--vote-iou", "0.3"]) == 0
        boxes = read_boxes(out)["f0"].boxes
        assert len(boxes) == 1
        assert boxes[0].cx == pytest.approx(0.25, abs=1e-12)
        assert boxes[0].score == 0.9


class TestConcat:
    def _files(self, tmp_path):
        cur = tmp_path / "cur.bin"
        prev = tmp_path / "prev.bin"
        _write_points(cur, [(1.0, 2.0, 0.5, 0.3), (-4.0, 0.25, 1.0, 0.0)])
        _write_points(prev, [(8.0, -1.0, 0.0, 0.9)])
        return cur, prev

    def test_merges_and_tags_time(self, tmp_path, capsys):
        cur, prev = self._files(tmp_path)
        out = tmp_path / "merged.bin"
        assert run(["concat", "--current", str(cur), "--previous", str(prev),
                    "--output", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "points_current=2" in stdout
        assert "points_previous=1" in stdout
        assert "points_out=3" in stdout
        merged = list(read_points(out, 5))
        assert len(merged) == 3
        # t survives a float32 round trip, so compare at that precision.
        assert [p.t for p in merged] == pytest.approx([0.0, 0.0, 0.1], abs=1e-7)
        assert merged[2].x == pytest.approx(8.0)

    def test_custom_delta(self, tmp_path):
        cur, prev = self._files(tmp_path)
        out = tmp_path / "merged.bin"
        assert run(["concat", "--current", str(cur), "--previous", str(prev),
                    "--delta", "0.25", "--output", str(out)]) == 0
        assert list(read_points(out, 5))[2].t == pytest.approx(0.25)

    def test_output_bytes_deterministic(self, tmp_path):
        cur, prev = self._files(tmp_path)
        out_a = tmp_path / "a.bin"
        out_b = tmp_path / "b.bin"
        assert run(["concat", "--current", str(cur), "--previous", str(prev),
                    "--output", str(out_a)]) == 0
        assert run(["concat", "--current", str(cur), "--previous", str(prev),
                    "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_truncated_binary_is_exit_3(self, tmp_path, capsys):
        cur = tmp_path / "cur.bin"
        cur.write_bytes(b"\x00" * 30)
        prev = tmp_path / "prev.bin"
        _write_points(prev, [(0.0, 0.0, 0.0, 0.0)])
        code = run(["concat", "--current", str(cur), "--previous", str(prev),
                    "--output", str(tmp_path / "o.bin")])
        assert code == 3
        assert capsys.readouterr().err.startswith("ERROR 3:")


class TestVoxelize:
    def _points_file(self, tmp_path):
        path = tmp_path / "pts.bin"
        _write_points(path, [
            (0.05, 0.05, 0.05, 0.5),
            (0.25, 0.30, 0.10, 0.5),
            (3.60, 0.05, 0.05, 0.5),
        ])
        return path

    def test_dynamic_summary(self, tmp_path, capsys):
        pts = self._points_file(tmp_path)
        out = tmp_path / "summary.json"
        assert run(["voxelize", "--points", str(pts), "--output", str(out),
                    "--vx", "1.0", "--vy", "1.0", "--vz", "1.0"]) == 0
        summary = json.loads(out.read_text())
        assert summary["mode"] == "DYNAMIC"
        assert summary["grid_shape"] == list(
            VoxelConfig(vx=1.0, vy=1.0, vz=1.0).grid_shape
        )
        assert summary["num_voxels"] == 2
        assert summary["stored_points"] == 3
        assert summary["dropped_points"] == 0
        assert summary["dropped_voxels"] == 0
        assert "points_in=3" in capsys.readouterr().out

    def test_hard_mode_with_cap(self, tmp_path):
        pts = self._points_file(tmp_path)
        out = tmp_path / "summary.json"
        assert run(["voxelize", "--points", str(pts), "--output", str(out),
                    "--mode", "hard", "--vx", "1.0", "--vy", "1.0",
                    "--vz", "1.0", "--max-points", "1"]) == 0
        summary = json.loads(out.read_text())
        assert summary["mode"] == "HARD"
        assert summary["stored_points"] == 2
        assert summary["dropped_points"] == 1
        assert summary["dropped_voxels"] == 0


class TestAssign:
    def _files(self, tmp_path):
        anchors = tmp_path / "anchors.jsonl"
        gts = tmp_path / "gts.jsonl"
        _write_jsonl(anchors, [
            _record(cx=0.0, cy=0.0, heading=0.0, score=0.5),
            _record(cx=2.0, cy=0.0, heading=0.0, score=0.5),
            _record(cx=30.0, cy=0.0, heading=0.0, score=0.5),
        ])
        _write_jsonl(gts, [_record(cx=0.0, cy=0.0, heading=0.0, score=1.0)])
        return anchors, gts

    def test_adaptive_records(self, tmp_path):
        anchors, gts = self._files(tmp_path)
        out = tmp_path / "assign.jsonl"
        assert run(["assign", "--anchors", str(anchors), "--gts", str(gts),
                    "--mode", "adaptive", "--k", "3",
                    "--output", str(out)]) == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        anchor_records = [r for r in records if "anchor_index" in r]
        threshold_records = [r for r in records if "adaptive_threshold" in r]
        assert len(anchor_records) == 3
        assert len(threshold_records) == 1
        assert anchor_records[0]["label"] == "POSITIVE"
        assert anchor_records[0]["gt_index"] == 0
        assert {r["label"] for r in anchor_records[1:]} == {"NEGATIVE"}

    def test_fixed_records(self, tmp_path):
        anchors, gts = self._files(tmp_path)
        out = tmp_path / "assign.jsonl"
        assert run(["assign", "--anchors", str(anchors), "--gts", str(gts),
                    "--mode", "fixed", "--pos-thr", "0.6",
                    "--neg-thr", "0.45", "--output", str(out)]) == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert all("adaptive_threshold" not in r for r in records)
        assert [r["label"] for r in records] == [
            "POSITIVE", "NEGATIVE", "NEGATIVE"
        ]


class TestTrack:
    def _detections_file(self, path):
        _write_jsonl(path, [
            _record(frame_id="f0", timestamp=0.0, cx=0.0, cy=0.0, heading=0.0),
            _record(frame_id="f1", timestamp=0.1, cx=0.5, cy=0.0, heading=0.0),
            _record(frame_id="f2", timestamp=0.2, cx=1.0, cy=0.0, heading=0.0),
        ])

    def test_single_object_keeps_one_id(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        self._detections_file(det)
        out = tmp_path / "o.jsonl"
        assert run(["track", "--input", str(det), "--output", str(out),
                    "--min-hits", "1"]) == 0
        stdout = capsys.readouterr().out
        assert "tracks=1" in stdout
        assert "reported=3" in stdout
        frames = read_boxes(out)
        assert list(frames) == ["f0", "f1", "f2"]
        ids = [frame.boxes[0].track_id for frame in frames.values()]
        assert ids == [0, 0, 0]
        assert [frame.boxes[0].cx for frame in frames.values()] == [0.0, 0.5, 1.0]

    def test_output_bytes_deterministic(self, tmp_path):
        det = tmp_path / "d.jsonl"
        self._detections_file(det)
        out_a = tmp_path / "a.jsonl"
        out_b = tmp_path / "b.jsonl"
        assert run(["track", "--input", str(det), "--output", str(out_a),
                    "--min-hits", "1"]) == 0
        assert run(["track", "--input", str(det), "--output", str(out_b),
                    "--min-hits", "1"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_decreasing_timestamps_are_exit_3(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(frame_id="f0", timestamp=1.0),
            _record(frame_id="f1", timestamp=0.5),
        ])
        code = run(["track", "--input", str(det),
                    "--output", str(tmp_path / "o.jsonl")])
        assert code == 3
        assert capsys.readouterr().err.startswith("ERROR 3:")


class TestEvalDet:
    def _gt_file(self, path):
        _write_jsonl(path, [
            _record(frame_id="f0", cx=0.0, track_id=1),
            _record(frame_id="f0", cx=30.0, track_id=2),
            _record(frame_id="f1", cx=10.0, track_id=1),
        ])

    def test_perfect_detections_score_one(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        assert run(["eval-det", "--detections", str(gt), "--gt", str(gt)]) == 0
        out = capsys.readouterr().out
        assert "VEHICLE.AP=1.0" in out
        assert "VEHICLE.APH=1.0" in out
        assert "VEHICLE.gt_count=3" in out
        assert "VEHICLE.det_count=3" in out
        assert "mean.AP=1.0" in out
        assert "difficulty=L2" in out
        assert "frames=2" in out

    def test_report_and_csv_files(self, tmp_path):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        report = tmp_path / "report.txt"
        csv = tmp_path / "pr.csv"
        assert run(["eval-det", "--detections", str(gt), "--gt", str(gt),
                    "--output", str(report), "--pr-csv", str(csv)]) == 0
        assert "VEHICLE.AP=1.0" in report.read_text()
        csv_lines = csv.read_text().splitlines()
        assert csv_lines[0] == "class,recall,precision,heading_precision"
        assert len(csv_lines) >= 2
        assert csv_lines[1].startswith("VEHICLE,")

    def test_missed_boxes_lower_ap(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        det = tmp_path / "det.jsonl"
        _write_jsonl(det, [_record(frame_id="f0", cx=0.0)])
        assert run(["eval-det", "--detections", str(det), "--gt", str(gt)]) == 0
        out = capsys.readouterr().out
        assert f"VEHICLE.AP={1.0 / 3.0!r}" in out


class TestEvalMot:
    def _gt_file(self, path):
        # Axis-aligned boxes keep the self-IoU exactly 1, so MOTP is 0.0.
        _write_jsonl(path, [
            _record(frame_id="f0", timestamp=0.0, cx=0.0, heading=0.0, track_id=7),
            _record(frame_id="f1", timestamp=0.1, cx=0.5, heading=0.0, track_id=7),
            _record(frame_id="f2", timestamp=0.2, cx=1.0, heading=0.0, track_id=7),
        ])

    def test_perfect_tracking(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        assert run(["eval-mot", "--tracked", str(gt), "--gt", str(gt)]) == 0
        out = capsys.readouterr().out
        assert "VEHICLE.MOTA=1.0" in out
        assert "VEHICLE.MOTP=0.0" in out
        assert "VEHICLE.FP=0" in out
        assert "VEHICLE.FN=0" in out
        assert "VEHICLE.IDS=0" in out
        assert "VEHICLE.gt_count=3" in out

    def test_dropped_frame_counts_fn(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        tracked = tmp_path / "tracked.jsonl"
        _write_jsonl(tracked, [
            _record(frame_id="f0", timestamp=0.0, cx=0.0, track_id=3),
            _record(frame_id="f2", timestamp=0.2, cx=1.0, track_id=3),
        ])
        assert run(["eval-mot", "--tracked", str(tracked), "--gt", str(gt)]) == 0
        out = capsys.readouterr().out
        assert "VEHICLE.FN=1" in out
        assert f"VEHICLE.MOTA={1.0 - 1.0 / 3.0!r}" in out

    def test_missing_track_id_is_exit_3(self, tmp_path, capsys):
        gt = tmp_path / "gt.jsonl"
        self._gt_file(gt)
        tracked = tmp_path / "tracked.jsonl"
        _write_jsonl(tracked, [_record(frame_id="f0", timestamp=0.0, cx=0.0)])
        code = run(["eval-mot", "--tracked", str(tracked), "--gt", str(gt)])
        assert code == 3
        assert capsys.readouterr().err.startswith("ERROR 3:")


class TestEnsemble:
    def _files(self, tmp_path):
        gt = tmp_path / "gt.jsonl"
        det_a = tmp_path / "det_a.jsonl"
        det_b = tmp_path / "det_b.jsonl"
        _write_jsonl(gt, [
            _record(cx=0.0, heading=0.0, track_id=1),
            _record(cx=30.0, heading=0.0, track_id=2),
        ])
        _write_jsonl(det_a, [_record(cx=0.0, heading=0.0, score=0.9)])
        _write_jsonl(det_b, [_record(cx=30.0, heading=0.0, score=0.9)])
        return gt, det_a, det_b

    def test_requires_class(self, tmp_path, capsys):
        gt, det_a, det_b = self._files(tmp_path)
        code = run(["ensemble", "--inputs", str(det_a), str(det_b),
                    "--gt", str(gt), "--output", str(tmp_path / "o.jsonl")])
        assert code == 2
        assert "class" in capsys.readouterr().err

    def test_requires_two_inputs(self, tmp_path, capsys):
        gt, det_a, _ = self._files(tmp_path)
        code = run(["ensemble", "--inputs", str(det_a), "--gt", str(gt),
                    "--class", "VEHICLE", "--output", str(tmp_path / "o.jsonl")])
        assert code == 2
        assert capsys.readouterr().err.startswith("ERROR 2:")

    def test_complementary_detectors_merge(self, tmp_path, capsys):
        gt, det_a, det_b = self._files(tmp_path)
        out = tmp_path / "merged.jsonl"
        assert run(["ensemble", "--inputs", str(det_a), str(det_b),
                    "--gt", str(gt), "--class", "VEHICLE",
                    "--grid", "0.5,1.0", "--output", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "detector_0 score=0.5" in stdout
        assert "detector_1 weight=0.5 score=1.0" in stdout
        merged = read_boxes(out)["f0"].boxes
        assert sorted(b.cx for b in merged) == [0.0, 30.0]
        by_cx = {b.cx: b for b in merged}
        assert by_cx[0.0].score == 0.9
        assert by_cx[30.0].score == pytest.approx(0.45, abs=1e-12)

    def test_unhelpful_candidate_skipped(self, tmp_path, capsys):
        gt, det_a, _ = self._files(tmp_path)
        full = tmp_path / "full.jsonl"
        _write_jsonl(full, [
            _record(cx=0.0, heading=0.0, score=0.9),
            _record(cx=30.0, heading=0.0, score=0.8),
        ])
        out = tmp_path / "merged.jsonl"
        assert run(["ensemble", "--inputs", str(full), str(det_a),
                    "--gt", str(gt), "--class", "VEHICLE",
                    "--output", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "detector_0 score=1.0" in stdout
        assert "detector_1 skipped" in stdout
        assert len(read_boxes(out)["f0"].boxes) == 2


class TestDefaultConfig:
    def test_prints_parseable_json(self, capsys):
        assert run(["default-config"]) == 0
        config = json.loads(capsys.readouterr().out)
        assert config == default_config()
        assert config["voxelizer"]["vx"] == 0.1
        assert config["voxelizer"]["vy"] == 0.1
        assert config["voxelizer"]["vz"] == 0.15
        assert config["assigner"]["k"] == 9
        assert config["ensemble"]["nms_iou"]["VEHICLE"] == 0.7
        assert config["metrics"]["iou_thr"]["VEHICLE"] == 0.7
        assert config["tracker"]["max_age"] == 2

    def test_writes_file_deterministically(self, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert run(["default-config", "--output", str(out_a)]) == 0
        assert run(["default-config", "--output", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert json.loads(out_a.read_text()) == default_config()

    def test_config_file_overrides_defaults(self, tmp_path, capsys):
        det = tmp_path / "d.jsonl"
        _write_jsonl(det, [
            _record(cx=0.0, cy=0.0, heading=0.0, score=0.9),
            _record(cx=0.5, cy=0.0, heading=0.0, score=0.8),
        ])
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"ensemble": {"nms_iou": {"VEHICLE": 0.9}}}))
        out = tmp_path / "o.jsonl"
        assert run(["nms", "--input", str(det), "--config", str(cfg),
                    "--output", str(out)]) == 0
        # 7/9 < 0.9, so the raised threshold keeps both boxes.
        assert len(read_boxes(out)["f0"].boxes) == 2


class TestThreadCap:
    def test_unset_means_auto(self, monkeypatch):
        monkeypatch.delenv("LIDARPOST_THREADS", raising=False)
        assert thread_cap() is None

    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.setenv("LIDARPOST_THREADS", "0")
        assert thread_cap() is None

    def test_positive_cap(self, monkeypatch):
        monkeypatch.setenv("LIDARPOST_THREADS", "4")
        assert thread_cap() == 4

    def test_garbage_means_auto(self, monkeypatch):
        monkeypatch.setenv("LIDARPOST_THREADS", "off")
        assert thread_cap() is None
