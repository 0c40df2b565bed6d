"""31-channel HOG in the Felzenszwalb et al. (PAMI 2010) formulation.

Per cell: 18 contrast-sensitive orientation channels, 9 contrast-insensitive
channels and 4 gradient-energy (texture) channels.
"""
from __future__ import annotations

import numpy as np

N_ORIENT = 9
CLIP = 0.2
TEXTURE_SCALE = 0.2357
EPS = 1e-4
N_CHANNELS = 31

_ANGLES = np.arange(N_ORIENT) * np.pi / N_ORIENT
_UU = np.cos(_ANGLES)
_VV = np.sin(_ANGLES)


def image_gradients(img: np.ndarray):
    """Central differences with replicated borders."""
    p = np.pad(img, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) * 0.5
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) * 0.5
    return gx, gy


def orientation_bins(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Snap each gradient to the nearest of 18 signed orientations."""
    dots = gx[..., None] * _UU + gy[..., None] * _VV
    best = np.argmax(np.abs(dots), axis=-1)
    sign = np.take_along_axis(dots, best[..., None], axis=-1)[..., 0]
    return np.where(sign < 0, best + N_ORIENT, best)


def _cell_weights(n_pix: int, n_cells: int):
    # pixel center in cell units, cell centers at integers
    pos = (np.arange(n_pix) + 0.5) * (n_cells / n_pix) - 0.5
    i0 = np.floor(pos).astype(np.int64)
    t = pos - i0
    return i0, t


def cell_histograms(img: np.ndarray, n_cells: tuple[int, int]) -> np.ndarray:
    """Magnitude-weighted 18-bin orientation histograms, bilinearly spread over cells."""
    gx, gy = image_gradients(img)
    mag = np.sqrt(gx * gx + gy * gy)
    bins = orientation_bins(gx, gy)
    ch, cw = n_cells
    h, w = img.shape
    yi, ty = _cell_weights(h, ch)
    xi, tx = _cell_weights(w, cw)
    stride = (cw + 2) * 2 * N_ORIENT
    base = ((yi + 1)[:, None] * stride + (xi + 1)[None, :] * 2 * N_ORIENT) + bins
    size = (ch + 2) * stride
    hist = np.zeros(size)
    for dy, wy in ((0, 1 - ty), (1, ty)):
        for dx, wx in ((0, 1 - tx), (1, tx)):
            wgt = mag * wy[:, None] * wx[None, :]
            idx = base + dy * stride + dx * 2 * N_ORIENT
            hist += np.bincount(idx.ravel(), weights=wgt.ravel(), minlength=size)
    hist = hist.reshape(ch + 2, cw + 2, 2 * N_ORIENT)
    # contributions that spill past the border cells are dropped
    return hist[1:-1, 1:-1]


def hog_features(patch: np.ndarray, cell: int) -> np.ndarray:
    """Return a ``(rows/cell, cols/cell, 31)`` HOG grid for a grayscale patch."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2:
        raise ValueError("hog_features expects a 2-D grayscale patch")
    h, w = patch.shape
    if h < 2 * cell or w < 2 * cell:
        raise ValueError(f"patch {h}x{w} smaller than two {cell}px cells")
    n_cells = (max(1, int(round(h / cell))), max(1, int(round(w / cell))))
    hist = cell_histograms(patch, n_cells)

    folded = hist[..., :N_ORIENT] + hist[..., N_ORIENT:]
    energy = np.sum(folded * folded, axis=-1)
    e = np.pad(energy, 1, mode="edge")
    # sums over the four 2x2 blocks that contain each cell
    s = e[:-1, :-1] + e[:-1, 1:] + e[1:, :-1] + e[1:, 1:]
    norms = [1.0 / np.sqrt(s[dy:dy + n_cells[0], dx:dx + n_cells[1]] + EPS)
             for dy in (0, 1) for dx in (0, 1)]

    out = np.zeros(n_cells + (N_CHANNELS,))
    for n_k, k in zip(norms, range(4)):
        clipped = np.minimum(hist * n_k[..., None], CLIP)
        out[..., :2 * N_ORIENT] += 0.5 * clipped
        out[..., 2 * N_ORIENT:3 * N_ORIENT] += 0.5 * np.minimum(folded * n_k[..., None], CLIP)
        out[..., 27 + k] = TEXTURE_SCALE * clipped.sum(axis=-1)
    return out
