"""Per-frame detection sets: CSV streams, a noisy synthetic oracle, first-frame boxes."""
from __future__ import annotations

import math
import queue
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from ..geometry import BoundingBox
from .csvutil import CsvFormatError, fmt, iter_rows, parse_number

PREFETCH_FRAMES = 8


@dataclass
class DetectionSet:
    frame_index: int
    detections: list[tuple[BoundingBox, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError(f"negative frame index {self.frame_index}")
        for _, conf in self.detections:
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"confidence {conf} outside [0, 1]")

    @property
    def boxes(self) -> list[BoundingBox]:
        return [b for b, _ in self.detections]

    def __len__(self):
        return len(self.detections)


def load_detections(path) -> Iterator[DetectionSet]:
    """Stream ``frame,x,y,w,h,confidence`` rows as one set per frame.

    Rows may come in any order. Frames between 0 and the last mentioned frame
    that have no rows yield empty sets. The whole file is validated before the
    first set is yielded.
    """
    per_frame: dict[int, list] = {}
    for line_no, f in iter_rows(path, 6, "frame"):
        frame = parse_number(path, line_no, f[0], int)
        if frame < 0:
            raise CsvFormatError(path, line_no, f"negative frame {frame}")
        x, y, w, h, conf = (parse_number(path, line_no, v) for v in f[1:])
        if not 0.0 <= conf <= 1.0:
            raise CsvFormatError(path, line_no, f"confidence {conf} outside [0, 1]")
        try:
            box = BoundingBox(x, y, w, h)
        except ValueError as exc:
            raise CsvFormatError(path, line_no, str(exc)) from None
        per_frame.setdefault(frame, []).append((box, conf))
    if not per_frame:
        return iter(())
    last = max(per_frame)
    return (DetectionSet(t, per_frame.get(t, [])) for t in range(last + 1))


def write_detections(sets: Iterable[DetectionSet], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("frame,x,y,w,h,confidence\n")
        for ds in sets:
            for box, conf in ds.detections:
                fh.write(",".join([str(ds.frame_index)] + [fmt(v) for v in box.as_tuple()]
                                  + [fmt(conf)]) + "\n")


def load_initial_boxes(path) -> list[tuple[int, BoundingBox]]:
    out, seen = [], set()
    for line_no, f in iter_rows(path, 5, "id"):
        tid = parse_number(path, line_no, f[0], int)
        if tid in seen:
            raise CsvFormatError(path, line_no, f"duplicate track id {tid}")
        seen.add(tid)
        try:
            box = BoundingBox(*(parse_number(path, line_no, v) for v in f[1:]))
        except ValueError as exc:
            if isinstance(exc, CsvFormatError):
                raise
            raise CsvFormatError(path, line_no, str(exc)) from None
        out.append((tid, box))
    if not out:
        raise ValueError(f"{path}: no initial boxes, the population must be at least 1")
    return out


def write_initial_boxes(boxes: Sequence[tuple[int, BoundingBox]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id,x,y,w,h\n")
        for tid, b in boxes:
            fh.write(",".join([str(tid)] + [fmt(v) for v in b.as_tuple()]) + "\n")


@dataclass(frozen=True)
class NoiseProfile:
    """Corruption applied to ground truth by the synthetic detector.

    ``fp_rate`` is the per-frame probability of one spurious box;
    ``fn_rate`` is the per-target drop probability, multiplied by
    ``occlusion_fn_boost`` (and capped at 1) while the target is occluded.
    """

    center_jitter_sigma: float = 0.0
    size_jitter_sigma: float = 0.0
    fp_rate: float = 0.0
    fn_rate: float = 0.0
    occlusion_fn_boost: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("fp_rate", "fn_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("center_jitter_sigma", "size_jitter_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.occlusion_fn_boost < 0:
            raise ValueError("occlusion_fn_boost must be >= 0")

    @property
    def is_identity(self) -> bool:
        return (self.center_jitter_sigma == 0 and self.size_jitter_sigma == 0
                and self.fp_rate == 0 and self.fn_rate == 0)


def _frame_rng(seed: int, frame: int) -> np.random.Generator:
    # a generator per frame keeps the stream reproducible under partial consumption
    return np.random.default_rng([seed, frame])


def noisy_detection_set(frame: int, gt: Mapping[int, BoundingBox], profile: NoiseProfile,
                        frame_size: tuple[int, int] | None = None,
                        occluded: Mapping[int, bool] | None = None) -> DetectionSet:
    rng = _frame_rng(profile.seed, frame)
    occluded = occluded or {}
    out = []
    for tid in sorted(gt):
        box = gt[tid]
        p_drop = profile.fn_rate
        if occluded.get(tid, False):
            p_drop = min(1.0, p_drop * profile.occlusion_fn_boost)
        draws = rng.random(), rng.standard_normal(4)
        if draws[0] < p_drop:
            continue
        if profile.is_identity:
            out.append((box, 1.0))
            continue
        jx, jy, sw, sh = draws[1]
        w = box.w * math.exp(profile.size_jitter_sigma * sw)
        h = box.h * math.exp(profile.size_jitter_sigma * sh)
        cx = box.cx + profile.center_jitter_sigma * jx
        cy = box.cy + profile.center_jitter_sigma * jy
        out.append((BoundingBox(cx - w / 2, cy - h / 2, w, h), 1.0))
    if rng.random() < profile.fp_rate:
        if frame_size is None:
            xs = [b.x for b in gt.values()] + [b.x2 for b in gt.values()]
            ys = [b.y for b in gt.values()] + [b.y2 for b in gt.values()]
            width = max(xs, default=100.0)
            height = max(ys, default=100.0)
        else:
            width, height = frame_size
        ref = list(gt.values())
        if ref:
            w = float(np.median([b.w for b in ref]))
            h = float(np.median([b.h for b in ref]))
        else:
            w, h = width / 10, height / 10
        w, h = min(w, width), min(h, height)
        x = rng.uniform(0, max(width - w, 0))
        y = rng.uniform(0, max(height - h, 0))
        out.append((BoundingBox(x, y, w, h), float(rng.uniform(0.3, 1.0))))
    return DetectionSet(frame, out)


def synthetic_detections(gt: Sequence[Mapping[int, BoundingBox]], profile: NoiseProfile,
                         frame_size: tuple[int, int] | None = None,
                         occlusion: Sequence[Mapping[int, bool]] | None = None
                         ) -> Iterator[DetectionSet]:
    """Corrupt per-frame ground truth ``gt[t] = {id: box}`` into detection sets."""
    for t, boxes in enumerate(gt):
        occ = occlusion[t] if occlusion is not None else None
        yield noisy_detection_set(t, boxes, profile, frame_size, occ)


class Prefetcher:
    """Run an iterator on a background thread at most ``depth`` items ahead."""

    _DONE = object()

    def __init__(self, source: Iterable, depth: int = PREFETCH_FRAMES):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self._queue: queue.Queue = queue.Queue(maxsize=depth)
        self._error = None
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._fill, args=(iter(source),), daemon=True)
        self._thread.start()

    def _fill(self, it):
        try:
            for item in it:
                while not self._stop.is_set():
                    try:
                        self._queue.put(item, timeout=0.1)
                        break
                    except queue.Full:
                        continue
                if self._stop.is_set():
                    return
        except BaseException as exc:  # handed to the consumer
            self._error = exc
        self._queue.put(self._DONE)

    def __iter__(self):
        while True:
            item = self._queue.get()
            if item is self._DONE:
                if self._error is not None:
                    raise self._error
                return
            yield item

    def close(self):
        self._stop.set()
