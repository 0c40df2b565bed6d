"""The per-frame loop: localize every track, associate, then update models."""
from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ..association import Status, Track, associate_frame
from ..dcf import DegenerateSampleError, init_track_model, localize, update_model
from ..features import PatchOutsideFrameError
from ..features.frame import Frame
from ..geometry import BoundingBox, TagBox
from ..io.detections import DetectionSet
from ..metrics.trajectories import TrajectorySet
from .config import PipelineConfig


@dataclass
class FrameTiming:
    frame: int
    localize_ms: float
    associate_ms: float
    update_ms: float
    total_ms: float


@dataclass
class RunLog:
    timings: list[FrameTiming] = field(default_factory=list)
    events: list[tuple[int, str, int]] = field(default_factory=list)   # frame, kind, track id
    trajectories: TrajectorySet = field(default_factory=TrajectorySet)
    tag_boxes: TrajectorySet = field(default_factory=TrajectorySet)
    completed: bool = False

    def events_of(self, kind: str, track_id: int | None = None) -> list[int]:
        return [f for f, k, tid in self.events
                if k == kind and (track_id is None or tid == track_id)]

    def to_json(self) -> str:
        return json.dumps({
            "completed": self.completed,
            "frames": len(self.timings),
            "timings": [dataclasses.asdict(t) for t in self.timings],
            "events": [{"frame": f, "event": k, "id": tid} for f, k, tid in self.events],
        }, indent=1) + "\n"


class TeleportInjection:
    """Force one track's tag-box to ``target`` (an absolute center) over [start, end]."""

    def __init__(self, track_id: int, start: int, end: int, target: tuple[float, float]):
        self.track_id, self.start, self.end, self.target = track_id, start, end, target

    def __call__(self, frame_index: int, tracks: Sequence[Track]) -> None:
        if not self.start <= frame_index <= self.end:
            return
        for t in tracks:
            if t.id == self.track_id:
                tb = t.tag_box
                t.tag_box = TagBox(self.target[0], self.target[1], tb.w, tb.h)


def _feature_config_for(cfg: PipelineConfig, frame: Frame):
    # color names need color; grayscale frames force the single-block setup
    if frame.mode == "grayscale" and cfg.features.mode == "day":
        return dataclasses.replace(cfg.features, mode="night")
    return cfg.features


class Tracker:
    """Stateful frame-by-frame driver around a fixed population of tracks."""

    def __init__(self, initial: Sequence[tuple[int, BoundingBox]], cfg: PipelineConfig | None = None,
                 perturb: Callable[[int, Sequence[Track]], None] | None = None):
        if not initial:
            raise ValueError("at least one initial box is required")
        ids = [tid for tid, _ in initial]
        if len(set(ids)) != len(ids):
            raise ValueError("initial track ids must be unique")
        self.cfg = cfg or PipelineConfig()
        self.initial = list(initial)
        self.perturb = perturb
        self.tracks: list[Track] = []
        self.log = RunLog()
        self.frame_index = -1
        self._pool = ThreadPoolExecutor(self.cfg.workers) if self.cfg.workers > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _map(self, fn, items):
        if self._pool is None:
            return [fn(x) for x in items]
        return list(self._pool.map(fn, items))

    def _init_model(self, frame: Frame, fcfg, track: Track):
        return init_track_model(frame, track.tag_box, self.cfg.tracker, fcfg)

    def _record(self, t: int) -> None:
        for tr in self.tracks:
            self.log.trajectories.add(tr.id, t, tr.bounding_box)
            self.log.tag_boxes.add(tr.id, t, tr.tag_box.to_bbox())

    def step(self, frame: Frame, detections: DetectionSet | Sequence[BoundingBox] | None):
        t = self.frame_index + 1
        if isinstance(detections, DetectionSet):
            if detections.frame_index != t:
                raise ValueError(f"detections for frame {detections.frame_index} "
                                 f"arrived at frame {t}")
            boxes = detections.boxes
        else:
            boxes = list(detections or [])
        t0 = time.perf_counter()
        fcfg = _feature_config_for(self.cfg, frame)
        acfg = self.cfg.association

        if t == 0:
            self.tracks = [Track.start(tid, box, 0, acfg.reinit_fraction) for tid, box in self.initial]
            models = self._map(lambda tr: self._init_model(frame, fcfg, tr), self.tracks)
            for tr, m in zip(self.tracks, models):
                tr.model = m
            self.frame_index = 0
            self._record(0)
            t1 = time.perf_counter()
            self.log.timings.append(FrameTiming(0, 0.0, 0.0, (t1 - t0) * 1e3, (t1 - t0) * 1e3))
            return {tr.id: tr.bounding_box for tr in self.tracks}

        # a day/night switch invalidates the learned channels
        stale = [tr for tr in self.tracks if tr.model.feature_config.mode != fcfg.mode]
        for tr, m in zip(stale, self._map(lambda tr: self._init_model(frame, fcfg, tr), stale)):
            tr.model = m
            self.log.events.append((t, "mode-reinit", tr.id))

        active = [tr for tr in self.tracks if tr.status != Status.PENDING]

        def _locate(tr):
            try:
                return localize(tr.model, frame, tr.tag_box)[0]
            except PatchOutsideFrameError:
                return tr.tag_box   # left the frame; association will age it
        located = self._map(_locate, active)
        for tr, tb in zip(active, located):
            tr.tag_box = tb
        if self.perturb is not None:
            self.perturb(t, self.tracks)
        t1 = time.perf_counter()

        result = associate_frame(self.tracks, boxes, acfg, t)
        for kind, tid in result.events:
            if kind != "refine":
                self.log.events.append((t, kind, tid))
        t2 = time.perf_counter()

        rebuild = [tr for tr in self.tracks if tr.needs_model]

        def _rebuild(tr):
            try:
                return self._init_model(frame, fcfg, tr)
            except DegenerateSampleError:
                return None
        for tr, m in zip(rebuild, self._map(_rebuild, rebuild)):
            tr.needs_model = False
            if m is None:
                self.log.events.append((t, "reinit-failed", tr.id))
            else:
                tr.model = m
        if t % self.cfg.tracker.update_interval == 0:
            fresh = {tr.id for tr in rebuild}
            due = [tr for tr in self.tracks
                   if tr.status == Status.TRACKED and tr.id not in fresh]
            self._map(lambda tr: update_model(tr.model, frame, tr.tag_box), due)
        t3 = time.perf_counter()

        self.frame_index = t
        self._record(t)
        t4 = time.perf_counter()
        self.log.timings.append(FrameTiming(t, (t1 - t0) * 1e3, (t2 - t1) * 1e3,
                                            (t3 - t2) * 1e3, (t4 - t0) * 1e3))
        return result.boxes


def run_sequence(frames: Iterable[Frame], detections: Iterable, initial, cfg: PipelineConfig | None = None,
                 perturb=None, on_frame=None) -> RunLog:
    """Track a whole sequence; stops cleanly when either source runs out.

    ``detections`` yields DetectionSet objects or plain box lists, one per frame.
    On an exception the partial log is attached to it as ``exc.run_log``.
    """
    tracker = Tracker(initial, cfg, perturb)
    det_iter = iter(detections)
    try:
        for frame in frames:
            try:
                dets = next(det_iter)
            except StopIteration:
                dets = DetectionSet(tracker.frame_index + 1)
            boxes = tracker.step(frame, dets)
            if on_frame is not None:
                on_frame(tracker.frame_index, boxes, tracker)
        tracker.log.completed = True
    except Exception as exc:
        exc.run_log = tracker.log
        raise
    finally:
        tracker.close()
    return tracker.log
