import json

import pytest

from micro import CASES, ground_truth
from tagtrack.geometry import BoundingBox
from tagtrack.io import CsvFormatError
from tagtrack.metrics import (TrajectorySet, clear_metrics, frame_correspondence,
                              load_trajectories, load_trajectories_with_flags,
                              track_level_metrics, write_trajectories)


@pytest.mark.parametrize("name", sorted(CASES))
def test_micro_scenarios(name):
    build, expected = CASES[name]
    gt, hyp = ground_truth(), build()
    report = clear_metrics(gt, hyp)
    for key, value in expected.items():
        assert getattr(report, key) == pytest.approx(value, abs=1e-12), key
    assert track_level_metrics(gt, hyp) == (expected["mt"], expected["pt"], expected["ml"])


def test_mostly_tracked_boundary_is_inclusive():
    gt = ground_truth()
    hyp = TrajectorySet()
    for t, box in gt.tracks[1]:
        if t < 8:
            hyp.add(5, t, box)
    for t, box in gt.tracks[2]:
        if t < 2:
            hyp.add(6, t, box)
    assert track_level_metrics(gt, hyp) == (1, 0, 1)


def test_worked_example_counts():
    # 9 objects for 1 frame, one box displaced past the threshold, one stray box
    gt, hyp = TrajectorySet(), TrajectorySet()
    for k in range(9):
        gt.add(k, 0, BoundingBox(30 * k, 0, 20, 20))
        hyp.add(k, 0, BoundingBox(30 * k + (15 if k == 0 else 0), 0, 20, 20))
    hyp.add(99, 0, BoundingBox(500, 500, 20, 20))
    r = clear_metrics(gt, hyp)
    assert (r.tp, r.fp, r.fn) == (8, 2, 1)
    assert r.faf == 2.0
    assert r.precision == pytest.approx(0.8)
    assert r.mota == pytest.approx(1 - 3 / 9)


def test_previous_pairs_are_kept():
    gt = {1: BoundingBox(0, 0, 10, 10)}
    hyp = {7: BoundingBox(1, 0, 10, 10), 8: BoundingBox(0, 0, 10, 10)}
    m = frame_correspondence(gt, hyp, previous={1: 7})
    assert m.pairs == {1: 7} and m.fp == [8] and m.switches == []
    m = frame_correspondence(gt, hyp)
    assert m.pairs == {1: 8}


def test_switch_counted_against_last_match_after_gap():
    gt = {1: BoundingBox(0, 0, 10, 10)}
    m = frame_correspondence(gt, {9: BoundingBox(0, 0, 10, 10)}, previous={}, last_match={1: 7})
    assert m.switches == [1]


def test_threshold_validation():
    with pytest.raises(ValueError):
        frame_correspondence({}, {}, iou_threshold=1.0)
    with pytest.raises(ValueError):
        clear_metrics(TrajectorySet(), TrajectorySet())
    with pytest.raises(ValueError):
        clear_metrics(ground_truth(), ground_truth(), mostly=0.1, lost=0.2)


def test_table_and_json():
    r = clear_metrics(ground_truth(), CASES["fp_only"][0]())
    row = r.table_row("S1")
    assert row.split("\t") == ["S1", "100.00", "66.67", "1.00", "2", "0", "0", "0", "0", "50.00"]
    assert r.table().splitlines()[0].startswith("Sequence\tRecall (%)")
    assert json.loads(r.to_json())["fp"] == 10
    assert "mota=0.5\n" in r.to_keyvalue()


def test_trajectory_round_trip(tmp_path):
    ts = ground_truth()
    flags = {(3, 1): True}
    p = tmp_path / "t.csv"
    write_trajectories(ts, p, flags)
    back, got_flags = load_trajectories_with_flags(p)
    assert back.tracks == ts.tracks
    assert got_flags[(3, 1)] is True and got_flags[(3, 2)] is False
    plain = tmp_path / "p.csv"
    write_trajectories(ts, plain)
    assert load_trajectories(plain).tracks == ts.tracks
    assert plain.read_text().splitlines()[0] == "frame,id,x,y,w,h"


def test_trajectory_format_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("frame,id,x,y,w,h\n0,1,0,0,5\n")
    with pytest.raises(CsvFormatError) as err:
        load_trajectories(p)
    assert "bad.csv:2" in str(err.value)
    p.write_text("frame,id,x,y,w,h\n0,1,0,0,5,5\n0,1,1,1,5,5\n")
    with pytest.raises(CsvFormatError):
        load_trajectories(p)


def test_trajectory_set_helpers():
    ts = TrajectorySet.from_frames([{1: BoundingBox(0, 0, 1, 1)}, {1: BoundingBox(1, 0, 1, 1)}], start=5)
    assert ts.frame_range() == (5, 6)
    assert sorted(ts.by_frame()) == [5, 6]
    assert [r[0] for r in ts.rows()] == [5, 6]
