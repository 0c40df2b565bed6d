from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

from ..geometry import BoundingBox, TagBox


class Status(str, enum.Enum):
    TRACKED = "tracked"
    DRIFT = "drift"
    PENDING = "pending"


@dataclass
class Track:
    """One target of the fixed population.

    ``confirmed_box`` is the last detection-backed bounding box and
    ``confirmed_center`` the tag-box center at that moment; together they
    define the default box.
    """

    id: int
    tag_box: TagBox
    bounding_box: BoundingBox
    tracklet: list[tuple[int, BoundingBox]] = field(default_factory=list)
    age: int = 0
    status: Status = Status.TRACKED
    model: Any = None
    confirmed_box: BoundingBox | None = None
    confirmed_center: tuple[float, float] | None = None
    confirmed_frame: int = 0
    needs_model: bool = False

    @classmethod
    def start(cls, track_id: int, box: BoundingBox, frame_index: int = 0,
              reinit_fraction: float = 0.4, model=None) -> "Track":
        tb = TagBox.centered_in(box, reinit_fraction)
        track = cls(track_id, tb, box, [(frame_index, box)], model=model)
        track.confirm(box, frame_index)
        return track

    def confirm(self, box: BoundingBox, frame_index: int) -> None:
        self.confirmed_box = box
        self.confirmed_center = (self.tag_box.cx, self.tag_box.cy)
        self.confirmed_frame = frame_index

    def emit(self, frame_index: int, box: BoundingBox) -> None:
        if self.tracklet and frame_index <= self.tracklet[-1][0]:
            raise ValueError(f"track {self.id}: frame {frame_index} is not after "
                             f"{self.tracklet[-1][0]}")
        self.bounding_box = box
        self.tracklet.append((frame_index, box))


def default_box_for(track: Track, frame_index: int | None = None,
                    max_carry_rate: float | None = None) -> BoundingBox:
    """Last confirmed box moved by the tag-box displacement since confirmation.

    With ``max_carry_rate`` set, displacements faster than that fraction of the
    box diagonal per elapsed frame are treated as tracker failure and not
    carried.
    """
    if not track.tracklet:
        raise ValueError(f"track {track.id} has an empty tracklet")
    base = track.confirmed_box or track.tracklet[-1][1]
    if track.confirmed_center is None:
        return base
    dx = track.tag_box.cx - track.confirmed_center[0]
    dy = track.tag_box.cy - track.confirmed_center[1]
    if max_carry_rate is not None:
        elapsed = 1 if frame_index is None else max(1, frame_index - track.confirmed_frame)
        if math.hypot(dx, dy) > max_carry_rate * base.diagonal * elapsed:
            return base
    return base.translated(dx, dy)


def reinitialize_tagbox(track: Track, box: BoundingBox, reinit_fraction: float = 0.4,
                        model_factory=None, frame_index: int | None = None) -> Track:
    """Re-center the tag-box on ``box`` and reset the drift counter.

    ``model_factory(tag_box)`` rebuilds the filter from the current frame; when
    it is omitted the track is flagged with ``needs_model``.
    """
    track.tag_box = TagBox.centered_in(box, reinit_fraction)
    track.age = 0
    track.status = Status.TRACKED
    track.confirm(box, track.confirmed_frame if frame_index is None else frame_index)
    if model_factory is not None:
        track.model = model_factory(track.tag_box)
        track.needs_model = False
    else:
        track.needs_model = True
    return track
