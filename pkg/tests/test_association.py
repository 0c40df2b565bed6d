import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tagtrack.association import (INFEASIBLE, AssociationConfig, Status, Track, associate_frame,
                                  build_cost_matrix, default_box_for, gated_cost,
                                  hungarian_assign, is_feasible, pair_cost)
from tagtrack.geometry import BoundingBox, TagBox


def brute_force_min(cost):
    n, m = cost.shape
    best = math.inf
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            best = min(best, sum(cost[i, perm[i]] for i in range(n)))
    else:
        for perm in itertools.permutations(range(n), m):
            best = min(best, sum(cost[perm[j], j] for j in range(m)))
    return best


@pytest.mark.parametrize("shape", [(1, 1), (3, 3), (2, 5), (5, 2), (6, 6)])
def test_hungarian_matches_enumeration(rng, shape):
    for _ in range(50):
        cost = rng.random(shape)
        m = hungarian_assign(cost, infeasible=10.0)
        assert len(m.pairs) == min(shape)
        assert m.total(cost) == pytest.approx(brute_force_min(cost), abs=1e-12)


def test_hungarian_never_pairs_infeasible():
    cost = np.array([[0.2, INFEASIBLE], [INFEASIBLE, INFEASIBLE]])
    m = hungarian_assign(cost)
    assert m.pairs == [(0, 0)]
    assert m.unmatched_rows == [1] and m.unmatched_cols == [1]


def test_hungarian_empty_and_invalid():
    m = hungarian_assign(np.zeros((0, 3)))
    assert m.pairs == [] and m.unmatched_cols == [0, 1, 2]
    with pytest.raises(ValueError):
        hungarian_assign(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        hungarian_assign(np.zeros(3))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
def test_hungarian_one_to_one(n, m, seed):
    cost = np.random.default_rng(seed).random((n, m))
    cost[cost > 0.7] = INFEASIBLE
    res = hungarian_assign(cost)
    rows = [r for r, _ in res.pairs]
    cols = [c for _, c in res.pairs]
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
    assert sorted(rows + res.unmatched_rows) == list(range(n))
    assert sorted(cols + res.unmatched_cols) == list(range(m))


def test_pair_cost_branches():
    db = BoundingBox(0, 0, 100, 50)
    # contained and concentric: zero cost
    assert pair_cost(db, TagBox(50, 25, 10, 10)) == 0.0
    # contained, off center: only the distance term
    assert pair_cost(db, TagBox(60, 25, 10, 10), 0.5) == pytest.approx(0.5 * 10 / math.hypot(100, 50))
    # half outside
    tb = TagBox(100, 25, 10, 10)
    expected = -math.log(0.5) + 0.5 * 50 / math.hypot(100, 50)
    assert pair_cost(db, tb) == pytest.approx(expected)
    assert pair_cost(db, TagBox(500, 25, 10, 10)) == 1.0
    assert gated_cost(db, TagBox(500, 25, 10, 10), AssociationConfig()) == INFEASIBLE


def test_gate_is_strict():
    cfg = AssociationConfig(delta=0.0, gate_cost=-math.log(0.5))
    db = BoundingBox(0, 0, 100, 50)
    assert not is_feasible(db, TagBox(100, 25, 10, 10), cfg)  # cost == gate
    assert is_feasible(db, TagBox(99, 25, 10, 10), cfg)


def test_cost_matrix_shape():
    dets = [BoundingBox(0, 0, 10, 10), BoundingBox(100, 0, 10, 10)]
    tags = [TagBox(5, 5, 2, 2)]
    c = build_cost_matrix(dets, tags)
    assert c.shape == (2, 1)
    assert c[0, 0] == 0.0 and c[1, 0] == INFEASIBLE


def test_association_config_validation():
    for kw in ({"delta": -1}, {"age_threshold": 0}, {"reinit_fraction": 0}):
        with pytest.raises(ValueError):
            AssociationConfig(**kw)


def box(cx, cy, w=40, h=20):
    return BoundingBox(cx - w / 2, cy - h / 2, w, h)


def tracks_at(*centers):
    return [Track.start(i + 1, box(*c)) for i, c in enumerate(centers)]


def test_fast_path_when_everything_matches():
    tracks = tracks_at((50, 50), (200, 50))
    dets = [box(201, 51), box(51, 50)]
    res = associate_frame(tracks, dets, frame_index=1)
    assert res.fast_path
    assert res.boxes[1] == dets[1] and res.boxes[2] == dets[0]
    assert all(t.status == Status.TRACKED for t in tracks)
    assert res.events == []


def test_missed_detection_uses_default_box():
    tracks = tracks_at((50, 50), (200, 50))
    tracks[1].tag_box = tracks[1].tag_box.translated(3, 1)
    res = associate_frame(tracks, [box(51, 50)], frame_index=1)
    assert not res.fast_path
    assert res.boxes[2] == box(203, 51)
    assert ("refine", 2) in res.events
    assert res.unassigned_tag_boxes == [2]
    assert tracks[1].status == Status.TRACKED


def test_default_box_ignores_implausible_jump():
    t = Track.start(1, box(50, 50))
    t.tag_box = t.tag_box.translated(200, 0)
    assert default_box_for(t, 1, max_carry_rate=0.25) == box(50, 50)
    assert default_box_for(t, 1) == box(250, 50)


def test_drifted_tag_ages_then_reinitializes():
    cfg = AssociationConfig(age_threshold=3)
    t = Track.start(7, box(100, 100))
    det = box(100, 100)
    reinit_frame = None
    for f in range(1, 8):
        t.tag_box = TagBox(400, 400, 16, 8)  # tracker stuck far away
        res = associate_frame([t], [det], cfg, frame_index=f)
        if res.reinitialized:
            reinit_frame = f
            break
        assert t.status == Status.DRIFT
        assert t.age == f
    assert reinit_frame == 4
    assert t.age == 0 and t.status == Status.TRACKED and t.needs_model
    assert t.tag_box == TagBox(100, 100, 16, 8)


def test_contested_detection_marks_weaker_track_pending():
    # both tag-boxes sit in the single detection; track 2 is further from its center
    tracks = tracks_at((100, 100), (300, 100))
    tracks[0].tag_box = TagBox(100, 100, 16, 8)
    tracks[1].tag_box = TagBox(110, 100, 16, 8)
    res = associate_frame(tracks, [box(100, 100)], frame_index=1)
    assert ("pending", 2) in res.events
    assert tracks[1].status == Status.PENDING
    assert tracks[0].status == Status.TRACKED

    # the pending track re-initializes on the first feasible free detection
    tracks[1].tag_box = TagBox(300, 100, 16, 8)
    res = associate_frame(tracks, [box(100, 100), box(302, 100)], frame_index=2)
    assert res.reinitialized == [2]
    assert res.boxes[2] == box(302, 100)
    assert tracks[1].status == Status.TRACKED


def test_contest_is_lost_by_the_tag_that_left_its_own_detection():
    # two overlapping targets; track 1's tag slid onto target 2 while still touching
    # detection 1, and target 2's detection is missed this frame
    tracks = [Track.start(1, box(100, 100, 60, 40)), Track.start(2, box(112, 118, 60, 40))]
    tracks[0].tag_box = TagBox(112, 114, 24, 16)
    det = box(100, 98, 60, 40)
    # track 1 is closer to the detection center than track 2, so the contested cost alone
    # would evict track 2
    assert pair_cost(det, tracks[0].tag_box) < pair_cost(det, tracks[1].tag_box) < 1
    res = associate_frame(tracks, [det], frame_index=1)
    assert res.boxes[1] == det
    assert ("pending", 1) in res.events and ("pending", 2) not in res.events
    assert tracks[1].status != Status.PENDING


def test_pending_without_detection_reinitializes_after_threshold():
    cfg = AssociationConfig(age_threshold=2)
    t = Track.start(1, box(100, 100))
    t.status = Status.PENDING
    events = []
    for f in range(1, 5):
        events.append(associate_frame([t], [], cfg, frame_index=f).reinitialized)
    assert events[:3] == [[], [], [1]]


def test_model_factory_called_on_reinit():
    cfg = AssociationConfig(age_threshold=1)
    t = Track.start(1, box(100, 100))
    built = []
    for f in (1, 2):
        t.tag_box = TagBox(500, 500, 16, 8)
        associate_frame([t], [box(100, 100)], cfg, f, model_factory=lambda tb: built.append(tb) or "m")
    assert built and t.model == "m" and not t.needs_model


def test_emit_requires_increasing_frames():
    t = Track.start(1, box(0, 0))
    with pytest.raises(ValueError):
        t.emit(0, box(0, 0))


centers = st.tuples(st.floats(30, 600), st.floats(30, 400))


@given(st.lists(centers, min_size=1, max_size=6), st.lists(centers, max_size=8),
       st.lists(st.tuples(st.floats(-30, 30), st.floats(-30, 30)), min_size=6, max_size=6))
def test_every_track_gets_one_box_and_detections_are_not_shared(tcs, dcs, shifts):
    tracks = tracks_at(*tcs)
    for t, (dx, dy) in zip(tracks, shifts):
        t.tag_box = t.tag_box.translated(dx, dy)
    dets = [box(*c) for c in dcs]
    res = associate_frame(tracks, dets, frame_index=1)
    assert set(res.boxes) == {t.id for t in tracks}
    assert all(len(t.tracklet) == 2 for t in tracks)
    used = [id(b) for b in res.boxes.values() if any(b is d for d in dets)]
    assert len(used) == len(set(used))
    assert all(t.age >= 0 for t in tracks)
