"""Numbered lossless frame files."""
from __future__ import annotations

import os
import re

import numpy as np
from PIL import Image

from ..features.frame import Frame

_NAME = re.compile(r"^(\d+)\.png$", re.IGNORECASE)


def frame_path(directory, index: int) -> str:
    return os.path.join(directory, f"{index:06d}.png")


def write_frame(frame: Frame, directory, index: int) -> str:
    os.makedirs(directory, exist_ok=True)
    path = frame_path(directory, index)
    Image.fromarray(frame.to_uint8()).save(path, optimize=False, compress_level=1)
    return path


def list_frames(directory) -> dict[int, str]:
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"frame directory {directory} does not exist")
    out = {}
    for name in os.listdir(directory):
        m = _NAME.match(name)
        if m:
            out[int(m.group(1))] = os.path.join(directory, name)
    return out


def read_frame(path) -> Frame:
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        return Frame(np.asarray(im))


def iter_frames(directory):
    """Frames 0, 1, 2, ... in order; stops at the first missing index."""
    files = list_frames(directory)
    t = 0
    while t in files:
        yield read_frame(files[t])
        t += 1
