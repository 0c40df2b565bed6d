import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tagtrack.geometry import BoundingBox
from tagtrack.io import (CsvFormatError, DetectionSet, NoiseProfile, Prefetcher, load_detections,
                         load_initial_boxes, synthetic_detections, write_detections,
                         write_initial_boxes)
from tagtrack.io.detections import noisy_detection_set


def test_detection_round_trip_exact(tmp_path, rng):
    sets = []
    for t in range(5):
        dets = [(BoundingBox(*rng.uniform(0, 100, 2), *rng.uniform(1, 50, 2)), float(rng.random()))
                for _ in range(int(rng.integers(0, 4)))]
        sets.append(DetectionSet(t, dets))
    p = tmp_path / "d.csv"
    write_detections(sets, p)
    back = list(load_detections(p))
    last = max((s.frame_index for s in sets if s.detections), default=-1)
    assert [s.detections for s in back] == [s.detections for s in sets[:last + 1]]


def test_gaps_yield_empty_sets_and_rows_may_be_unordered(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("# comment\nframe,x,y,w,h,confidence\n3,0,0,5,5,0.9\n\n0,1,1,5,5,1\n")
    sets = list(load_detections(p))
    assert [s.frame_index for s in sets] == [0, 1, 2, 3]
    assert [len(s) for s in sets] == [1, 0, 0, 1]


@pytest.mark.parametrize("row,msg", [
    ("0,0,0,5,5,1.5", "confidence"),
    ("0,0,0,-5,5,1", "degenerate"),
    ("-1,0,0,5,5,1", "negative"),
    ("0,0,0,5,5", "fields"),
    ("0,0,0,five,5,1", "number"),
])
def test_detection_format_errors(tmp_path, row, msg):
    p = tmp_path / "d.csv"
    p.write_text("frame,x,y,w,h,confidence\n0,0,0,5,5,1\n" + row + "\n")
    with pytest.raises(CsvFormatError) as err:
        load_detections(p)
    assert err.value.line_no == 3
    assert msg in str(err.value)


def test_initial_boxes(tmp_path):
    p = tmp_path / "i.csv"
    boxes = [(3, BoundingBox(1, 2, 3, 4)), (1, BoundingBox(0.5, 0.25, 10, 20))]
    write_initial_boxes(boxes, p)
    assert load_initial_boxes(p) == boxes
    p.write_text("id,x,y,w,h\n1,0,0,5,5\n1,1,1,5,5\n")
    with pytest.raises(CsvFormatError, match="duplicate"):
        load_initial_boxes(p)
    p.write_text("id,x,y,w,h\n")
    with pytest.raises(ValueError, match="at least 1"):
        load_initial_boxes(p)


def test_detection_set_validation():
    with pytest.raises(ValueError):
        DetectionSet(-1)
    with pytest.raises(ValueError):
        DetectionSet(0, [(BoundingBox(0, 0, 1, 1), 2.0)])


def test_identity_profile_passes_ground_truth_through():
    gt = [{1: BoundingBox(0, 0, 5, 5), 2: BoundingBox(10, 0, 5, 5)}] * 3
    sets = list(synthetic_detections(gt, NoiseProfile()))
    assert all(s.boxes == [gt[0][1], gt[0][2]] for s in sets)


def test_noise_rates_monte_carlo():
    gt = {k: BoundingBox(40 * k, 10, 30, 20) for k in range(5)}
    prof = NoiseProfile(center_jitter_sigma=2.0, fp_rate=0.3, fn_rate=0.1, seed=4)
    n = 4000
    kept = fps = 0
    dx = []
    for t in range(n):
        s = noisy_detection_set(t, gt, prof, (640, 480))
        fps += sum(1 for _, c in s.detections if c < 1.0)
        true = [b for b, c in s.detections if c == 1.0]
        kept += len(true)
        dx.extend(b.cx - min(gt.values(), key=lambda g: abs(g.cx - b.cx)).cx for b in true)
    # binomial standard errors: fp ~0.007, keep ~0.002
    assert fps / n == pytest.approx(0.3, abs=0.03)
    assert kept / (5 * n) == pytest.approx(0.9, abs=0.01)
    assert np.std(dx) == pytest.approx(2.0, rel=0.05)


def test_occlusion_boost_raises_drop_rate():
    gt = {1: BoundingBox(0, 0, 30, 20)}
    prof = NoiseProfile(fn_rate=0.1, occlusion_fn_boost=5, seed=1)
    kept = sum(len(noisy_detection_set(t, gt, prof, (100, 100), {1: True})) for t in range(3000))
    assert kept / 3000 == pytest.approx(0.5, abs=0.04)


def test_false_positive_inside_frame():
    gt = {1: BoundingBox(0, 0, 30, 20)}
    prof = NoiseProfile(fp_rate=1.0, seed=2)
    for t in range(200):
        fp = [b for b, c in noisy_detection_set(t, gt, prof, (200, 100)).detections if c < 1][0]
        assert 0 <= fp.x and fp.x2 <= 200 and 0 <= fp.y and fp.y2 <= 100


@given(st.integers(0, 1000), st.integers(0, 50))
def test_noise_is_reproducible_per_frame(seed, frame):
    gt = {1: BoundingBox(0, 0, 30, 20), 2: BoundingBox(50, 50, 30, 20)}
    prof = NoiseProfile(2.0, 0.05, 0.5, 0.2, seed=seed)
    assert noisy_detection_set(frame, gt, prof) == noisy_detection_set(frame, gt, prof)


def test_noise_profile_validation():
    with pytest.raises(ValueError):
        NoiseProfile(fp_rate=1.5)
    with pytest.raises(ValueError):
        NoiseProfile(center_jitter_sigma=-1)


def test_prefetcher_preserves_order_and_errors():
    assert list(Prefetcher(range(50), depth=2)) == list(range(50))

    def boom():
        yield 1
        raise RuntimeError("bad source")

    it = iter(Prefetcher(boom()))
    assert next(it) == 1
    with pytest.raises(RuntimeError, match="bad source"):
        next(it)


def test_prefetcher_runs_ahead_and_closes():
    produced = []
    gate = threading.Event()

    def source():
        for i in range(100):
            produced.append(i)
            yield i
        gate.set()

    pf = Prefetcher(source(), depth=3)
    it = iter(pf)
    assert next(it) == 0
    pf.close()
    assert not gate.wait(0.3)
    assert len(produced) <= 6
