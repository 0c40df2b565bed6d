"""Burn boxes into frames and draw trajectory plots."""
from __future__ import annotations

import colorsys
import os
import shutil

from PIL import Image, ImageDraw

from ..metrics.trajectories import TrajectorySet
from .frames import frame_path, list_frames

BOX_COLOR = (255, 0, 0)
TAG_COLOR = (255, 255, 0)


def _id_color(tid: int) -> tuple[int, int, int]:
    # golden-ratio hue steps keep neighbouring ids apart
    h = (tid * 0.618033988749895) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.85, 0.95)
    return int(255 * r), int(255 * g), int(255 * b)


def _rect(draw, box, color, width=2):
    draw.rectangle([box.x, box.y, box.x2 - 1, box.y2 - 1], outline=color, width=width)


def render_overlays(frames_dir, trajectories: TrajectorySet, out_dir,
                    tag_boxes: TrajectorySet | None = None) -> list[str]:
    """Write one annotated PNG per input frame.

    Frames without any box are copied byte for byte. A trajectory frame with no
    matching image is an error.
    """
    files = list_frames(frames_dir)
    boxes = trajectories.by_frame()
    tags = tag_boxes.by_frame() if tag_boxes is not None else {}
    for t in sorted(set(boxes) | set(tags)):
        if t not in files:
            raise FileNotFoundError(f"frame {t} is missing from {frames_dir}")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for t in sorted(files):
        dst = frame_path(out_dir, t)
        if t not in boxes and t not in tags:
            shutil.copyfile(files[t], dst)
            written.append(dst)
            continue
        with Image.open(files[t]) as im:
            im = im.convert("RGB")
        draw = ImageDraw.Draw(im)
        for tid, tb in sorted(tags.get(t, {}).items()):
            _rect(draw, tb, TAG_COLOR, 1)
        for tid, b in sorted(boxes.get(t, {}).items()):
            _rect(draw, b, BOX_COLOR)
            draw.text((b.x + 3, b.y + 2), str(tid), fill=BOX_COLOR)
        im.save(dst, compress_level=1)
        written.append(dst)
    return written


def trajectory_plot(trajectories: TrajectorySet, size: tuple[int, int], path,
                    background=(255, 255, 255)) -> str:
    """Per-id polyline of box centers on a blank canvas of ``size = (width, height)``."""
    im = Image.new("RGB", size, background)
    draw = ImageDraw.Draw(im)
    for tid in trajectories.ids:
        pts = [(b.cx, b.cy) for _, b in trajectories.tracks[tid]]
        color = _id_color(tid)
        if len(pts) > 1:
            draw.line(pts, fill=color, width=2)
        if pts:
            x, y = pts[-1]
            draw.ellipse([x - 3, y - 3, x + 3, y + 3], fill=color)
            draw.text((x + 5, y - 5), str(tid), fill=color)
    im.save(path)
    return path
