from __future__ import annotations

import numpy as np


class Frame:
    """An image with per-channel intensities in [0, 1].

    ``data`` is ``(H, W)`` for grayscale frames and ``(H, W, 3)`` RGB for color.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data)
        if data.dtype == np.uint8:
            data = data.astype(np.float32) / 255.0
        else:
            data = data.astype(np.float32, copy=False)
        if data.ndim == 3 and data.shape[2] == 1:
            data = data[:, :, 0]
        if data.ndim not in (2, 3) or (data.ndim == 3 and data.shape[2] != 3):
            raise ValueError(f"frame must be HxW or HxWx3, got shape {data.shape}")
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise ValueError("frame dimensions must be positive")
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def mode(self) -> str:
        return "color" if self.data.ndim == 3 else "grayscale"

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.data * 255.0), 0, 255).astype(np.uint8)


def to_gray(image: np.ndarray) -> np.ndarray:
    """Luma projection (ITU-R BT.601) of an RGB array; grayscale passes through."""
    if image.ndim == 2:
        return image
    return image[..., 0] * 0.299 + image[..., 1] * 0.587 + image[..., 2] * 0.114
