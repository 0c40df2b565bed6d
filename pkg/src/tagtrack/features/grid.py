from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass
class FeatureBlock:
    """One feature type sampled on its own grid: ``values`` is (rows, cols, channels)."""

    name: str
    cell: int
    values: np.ndarray

    @property
    def channels(self) -> int:
        return self.values.shape[2]

    @property
    def grid(self) -> tuple[int, int]:
        return self.values.shape[:2]


def keys_kernel(s: np.ndarray, a: float = -0.5) -> np.ndarray:
    s = np.abs(s)
    out = np.zeros_like(s)
    near = s <= 1
    far = (s > 1) & (s < 2)
    out[near] = (a + 2) * s[near] ** 3 - (a + 3) * s[near] ** 2 + 1
    out[far] = a * s[far] ** 3 - 5 * a * s[far] ** 2 + 8 * a * s[far] - 4 * a
    return out


@lru_cache(maxsize=64)
def cubic_resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) cubic-convolution operator between grids spanning one extent.

    Taps outside the input are linearly extrapolated from the two nearest
    samples, so constants and linear ramps are reproduced everywhere.
    """
    if n_in == n_out:
        m = np.eye(n_in)
    elif n_in == 1:
        m = np.ones((n_out, 1))
    else:
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        m = np.zeros((n_out, n_in))
        base = np.floor(pos).astype(int)
        for off in (-1, 0, 1, 2):
            k = base + off
            wk = keys_kernel(pos - k)
            for row, (kk, ww) in enumerate(zip(k, wk)):
                if 0 <= kk < n_in:
                    m[row, kk] += ww
                elif kk < 0:
                    # x[k] = x[0] + k (x[1] - x[0])
                    m[row, 0] += ww * (1 - kk)
                    m[row, 1] += ww * kk
                else:
                    j = kk - (n_in - 1)
                    m[row, n_in - 1] += ww * (1 + j)
                    m[row, n_in - 2] -= ww * j
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def fourier_resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) trigonometric interpolation between grids spanning one extent.

    Treats the input as one period of a band-limited signal (Nyquist term split
    symmetrically), so a shift of the input is an exact shift of the output.
    """
    if n_in == n_out:
        m = np.eye(n_in)
    else:
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        k = np.arange(-(n_in // 2), n_in // 2 + 1)
        c = np.ones(k.size)
        if n_in % 2 == 0:
            c[0] = c[-1] = 0.5
        phase = 2 * np.pi * (pos[:, None, None] - np.arange(n_in)[None, :, None]) * k / n_in
        m = np.sum(c * np.cos(phase), axis=2) / n_in
    m.setflags(write=False)
    return m


_MATRICES = {"cubic": cubic_resample_matrix, "fourier": fourier_resample_matrix}


def resample_block(values: np.ndarray, grid: tuple[int, int],
                   method: str = "cubic") -> np.ndarray:
    make = _MATRICES[method]
    my = make(values.shape[0], grid[0])
    mx = make(values.shape[1], grid[1])
    rows = np.tensordot(my, values, axes=(1, 0))
    return np.tensordot(mx, rows, axes=(1, 1)).transpose(1, 0, 2)


def to_common_grid(blocks: list[FeatureBlock], method: str = "cubic") -> np.ndarray:
    """Stack all blocks on the finest block's grid, channels in block order.

    ``method`` is ``"cubic"`` (separable Keys cubic convolution) or
    ``"fourier"`` (trigonometric interpolation).
    """
    if not blocks:
        raise ValueError("to_common_grid needs at least one block")
    if method not in _MATRICES:
        raise ValueError(f"unknown interpolation {method!r}")
    target = max((b.grid for b in blocks), key=lambda g: g[0] * g[1])
    parts = [b.values if b.grid == target else resample_block(b.values, target, method)
             for b in blocks]
    return np.concatenate(parts, axis=2)
