from __future__ import annotations

import math

import numpy as np

from ..geometry import TagBox
from .config import FeatureConfig
from .frame import Frame


class PatchOutsideFrameError(ValueError):
    """The requested search area does not intersect the frame at all."""


def search_extent(tb: TagBox, scale: float, cfg: FeatureConfig) -> tuple[float, float]:
    """Width and height (pixels) of the search area around ``tb``."""
    k = math.sqrt(cfg.search_area_factor) * scale
    return tb.w * k, tb.h * k


def _axis_weights(coords: np.ndarray, n: int):
    i0 = np.floor(coords)
    t = (coords - i0).astype(np.float32)
    i0 = i0.astype(np.int64)
    lo = np.clip(i0, 0, n - 1)
    hi = np.clip(i0 + 1, 0, n - 1)
    return lo, hi, t


def sample_grid(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``image`` at the tensor grid ``ys x xs``.

    ``xs``/``ys`` are continuous pixel coordinates (pixel centers at +0.5).
    Samples beyond the border replicate the edge pixels.
    """
    h, w = image.shape[:2]
    ylo, yhi, ty = _axis_weights(ys - 0.5, h)
    xlo, xhi, tx = _axis_weights(xs - 0.5, w)
    # gather only the touched rows and columns
    cols = np.concatenate([xlo, xhi])
    top = image[ylo[:, None], cols[None, :]]
    bot = image[yhi[:, None], cols[None, :]]
    ty = ty[(slice(None),) + (None,) * (image.ndim - 1)]
    rows = top * (1 - ty) + bot * ty
    n = len(xs)
    tx = tx[(slice(None),) + (None,) * (image.ndim - 2)]
    return rows[:, :n] * (1 - tx) + rows[:, n:] * tx


def extract_patch(frame: Frame, tb: TagBox, scale: float, cfg: FeatureConfig,
                  out_size: tuple[int, int] | None = None) -> np.ndarray:
    """Resample the search area around ``tb`` into a ``(rows, cols)`` patch.

    The area has side lengths ``tb.{w,h} * sqrt(search_area_factor) * scale``.
    Without ``out_size`` the patch has one sample per source pixel.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    ext_w, ext_h = search_extent(tb, scale, cfg)
    if (tb.cx + ext_w / 2 <= 0 or tb.cx - ext_w / 2 >= frame.width
            or tb.cy + ext_h / 2 <= 0 or tb.cy - ext_h / 2 >= frame.height):
        raise PatchOutsideFrameError(
            f"search area of {tb} lies entirely outside the {frame.width}x{frame.height} frame")
    if out_size is None:
        out_size = (max(1, int(round(ext_h))), max(1, int(round(ext_w))))
    n_rows, n_cols = out_size
    xs = tb.cx + (np.arange(n_cols) + 0.5 - n_cols / 2.0) * (ext_w / n_cols)
    ys = tb.cy + (np.arange(n_rows) + 0.5 - n_rows / 2.0) * (ext_h / n_rows)
    return sample_grid(frame.data, xs, ys)
