from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from ..geometry import BoundingBox
from ..io.csvutil import CsvFormatError, fmt, iter_rows, parse_number


@dataclass
class TrajectorySet:
    """Boxes per id, each list ordered by strictly increasing frame."""

    tracks: dict[int, list[tuple[int, BoundingBox]]] = field(default_factory=dict)

    def add(self, track_id: int, frame: int, box: BoundingBox) -> None:
        seq = self.tracks.setdefault(track_id, [])
        if seq and frame <= seq[-1][0]:
            raise ValueError(f"id {track_id}: frame {frame} does not follow {seq[-1][0]}")
        seq.append((frame, box))

    @classmethod
    def from_frames(cls, frames: Iterable[Mapping[int, BoundingBox]], start: int = 0):
        ts = cls()
        for t, boxes in enumerate(frames, start=start):
            for tid in sorted(boxes):
                ts.add(tid, t, boxes[tid])
        return ts

    @property
    def ids(self) -> list[int]:
        return sorted(self.tracks)

    def __len__(self):
        return sum(len(v) for v in self.tracks.values())

    def frame_range(self) -> tuple[int, int] | None:
        frames = [f for seq in self.tracks.values() for f, _ in seq]
        if not frames:
            return None
        return min(frames), max(frames)

    def by_frame(self) -> dict[int, dict[int, BoundingBox]]:
        out: dict[int, dict[int, BoundingBox]] = {}
        for tid in self.ids:
            for frame, box in self.tracks[tid]:
                out.setdefault(frame, {})[tid] = box
        return out

    def rows(self) -> Iterator[tuple[int, int, BoundingBox]]:
        """(frame, id, box) ascending by frame then id."""
        per = self.by_frame()
        for frame in sorted(per):
            for tid in sorted(per[frame]):
                yield frame, tid, per[frame][tid]


def write_trajectories(ts: TrajectorySet, path, flags: Mapping[tuple[int, int], bool] | None = None) -> None:
    """Write ``frame,id,x,y,w,h``; with ``flags`` an ``occluded`` column is appended."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("frame,id,x,y,w,h" + (",occluded" if flags is not None else "") + "\n")
            for frame, tid, b in ts.rows():
                row = [str(frame), str(tid)] + [fmt(v) for v in b.as_tuple()]
                if flags is not None:
                    row.append("1" if flags.get((frame, tid), False) else "0")
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trajectories to {path}: {exc}") from exc


def _load(path, with_flags):
    import os
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        head = ""
        for line in fh:
            head = line.split("#", 1)[0].strip()
            if head:
                break
    n = 7 if head.count(",") == 6 else 6
    ts, flags, rows = TrajectorySet(), {}, []
    for line_no, f in iter_rows(path, n, "frame"):
        frame = parse_number(path, line_no, f[0], int)
        tid = parse_number(path, line_no, f[1], int)
        try:
            box = BoundingBox(*(parse_number(path, line_no, v) for v in f[2:6]))
        except CsvFormatError:
            raise
        except ValueError as exc:
            raise CsvFormatError(path, line_no, str(exc)) from None
        rows.append((frame, tid, box, line_no))
        if n == 7:
            flags[(frame, tid)] = f[6] not in ("0", "", "false", "False")
    for frame, tid, box, line_no in sorted(rows, key=lambda r: (r[1], r[0])):
        try:
            ts.add(tid, frame, box)
        except ValueError as exc:
            raise CsvFormatError(path, line_no, str(exc)) from None
    return (ts, flags) if with_flags else ts


def load_trajectories(path) -> TrajectorySet:
    return _load(path, False)


def load_trajectories_with_flags(path):
    return _load(path, True)
