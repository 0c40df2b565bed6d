"""Hierarchical detection / tag-box association.

Round 1 matches detections to the tag-boxes of non-pending tracks. Each
track left over is then given its default box, which either grabs the best
remaining detection or stands in for the missing one. A tag-box that no longer
sits inside its track's box ages, and re-initializes once its age exceeds the
threshold. A tag-box inside a detection already owned by another track
triggers the pending state for the less confident of the two.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..geometry import BoundingBox
from .cost import AssociationConfig, build_cost_matrix, gated_cost, is_feasible, pair_cost
from .hungarian import INFEASIBLE, hungarian_assign
from .tracks import Status, Track, default_box_for, reinitialize_tagbox


@dataclass
class FrameResult:
    frame_index: int
    boxes: dict[int, BoundingBox] = field(default_factory=dict)
    status: dict[int, Status] = field(default_factory=dict)
    unassigned_detections: list[int] = field(default_factory=list)
    unassigned_tag_boxes: list[int] = field(default_factory=list)
    events: list[tuple[str, int]] = field(default_factory=list)
    fast_path: bool = False

    @property
    def reinitialized(self) -> list[int]:
        return [tid for kind, tid in self.events if kind == "reinit"]


def _best_detection(box: BoundingBox, detections, candidates, cfg) -> int | None:
    tb = box.to_tagbox()
    best, best_cost = None, INFEASIBLE
    for j in sorted(candidates):
        c = gated_cost(detections[j], tb, cfg)
        if c < best_cost:
            best, best_cost = j, c
    return best


def associate_frame(tracks: list[Track], detections: list[BoundingBox],
                    cfg: AssociationConfig | None = None, frame_index: int = 0,
                    model_factory=None) -> FrameResult:
    """Assign one box to every track for this frame and advance the track states.

    ``tracks`` must already carry this frame's localized tag-boxes. Tracklets,
    ages and statuses are updated in place.
    """
    cfg = cfg or AssociationConfig()
    result = FrameResult(frame_index)
    detections = list(detections)
    active = [t for t in tracks if t.status != Status.PENDING]
    pending = [t for t in tracks if t.status == Status.PENDING]

    matching = hungarian_assign(build_cost_matrix(detections, [t.tag_box for t in active], cfg))
    owner: dict[int, Track] = {}
    for j, i in matching.pairs:
        owner[j] = active[i]

    if (not pending and len(matching.pairs) == len(detections) == len(active)):
        result.fast_path = True
    for j, track in owner.items():
        track.confirm(detections[j], frame_index)
        track.age = max(0, track.age - 1)
        track.status = Status.TRACKED
        track.emit(frame_index, detections[j])
    if result.fast_path:
        _collect(result, tracks, [], [])
        return result

    free = set(matching.unmatched_rows)
    leftovers = [active[i] for i in matching.unmatched_cols] + pending
    result.unassigned_tag_boxes = [t.id for t in leftovers]
    for track in leftovers:
        default = default_box_for(track, frame_index, cfg.max_carry_rate)
        best = _best_detection(default, detections, free, cfg)

        if track.status == Status.PENDING:
            if best is not None:
                free.discard(best)
                box = detections[best]
                owner[best] = track
                _reinit(track, box, cfg, frame_index, model_factory, result)
            else:
                box = default
                track.age += 1
                if track.age > cfg.age_threshold:
                    _reinit(track, box, cfg, frame_index, model_factory, result)
            track.emit(frame_index, box)
            continue

        if best is not None:
            free.discard(best)
            box = detections[best]
            owner[best] = track
            track.confirm(box, frame_index)
        else:
            box = default
            result.events.append(("refine", track.id))
        track.emit(frame_index, box)

        if is_feasible(box, track.tag_box, cfg):
            track.age = max(0, track.age - 1)
            track.status = Status.TRACKED
        else:
            track.age += 1
            track.status = Status.DRIFT
            result.events.append(("drift", track.id))

        if track.age > cfg.age_threshold:
            _reinit(track, box, cfg, frame_index, model_factory, result)
            continue

        for j, other in list(owner.items()):
            if other is track or not is_feasible(detections[j], track.tag_box, cfg):
                continue
            loser = track if _confidence_cost(track, detections[j], cfg) > \
                _confidence_cost(other, detections[j], cfg) else other
            loser.status = Status.PENDING
            result.events.append(("pending", loser.id))
            break

    _collect(result, tracks, sorted(free), result.unassigned_tag_boxes)
    return result


def _confidence_cost(track: Track, contested: BoundingBox, cfg) -> tuple:
    """Sort key for a contest; the larger key goes pending.

    First how well the tag-box sits in the track's latest detection-backed box
    (a default box always fits its own tag, so it is not evidence), then in
    the contested detection, then the id.
    """
    own = track.confirmed_box or track.bounding_box
    return (pair_cost(own, track.tag_box, cfg.delta),
            pair_cost(contested, track.tag_box, cfg.delta), track.id)


def _reinit(track, box, cfg, frame_index, model_factory, result):
    reinitialize_tagbox(track, box, cfg.reinit_fraction, model_factory, frame_index)
    result.events.append(("reinit", track.id))


def _collect(result, tracks, free_dets, free_tags):
    for t in tracks:
        result.boxes[t.id] = t.bounding_box
        result.status[t.id] = t.status
    result.unassigned_detections = list(free_dets)
    result.unassigned_tag_boxes = list(free_tags)
