"""Color Names features: per-cell average of 11 color-name probabilities.

The lookup table maps each of the 32x32x32 quantized RGB bins (8 levels per
bin, red varying fastest) to a probability vector over::

    black, blue, brown, grey, green, orange, pink, purple, red, white, yellow

Table file format (``colornames_w2c.txt.gz``): 32768 whitespace-separated rows.
Each row is either the 11 probabilities, or the bin's R G B values followed by
the 11 probabilities (14 columns, the layout of the widely distributed
``w2c.txt``). Rows are in bin order ``r//8 + 32*(g//8) + 1024*(b//8)``.
``.npy`` arrays of shape (32768, 11) and MATLAB ``.mat`` files with a ``w2c``
variable are also accepted.
"""
from __future__ import annotations

import gzip
import os
from functools import lru_cache
from pathlib import Path

import numpy as np

COLOR_NAMES = ("black", "blue", "brown", "grey", "green", "orange",
               "pink", "purple", "red", "white", "yellow")
N_CHANNELS = len(COLOR_NAMES)
N_BINS = 32 * 32 * 32

# sRGB prototypes the bundled table is built from
PROTOTYPES = np.array([
    [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.4, 0.25], [0.5, 0.5, 0.5],
    [0.0, 1.0, 0.0], [1.0, 0.8, 0.0], [1.0, 0.5, 1.0], [0.5, 0.0, 0.5],
    [1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 0.0]])

DEFAULT_TABLE = Path(__file__).resolve().parent.parent / "data" / "colornames_w2c.txt.gz"
TABLE_ENV = "TAGTRACK_CN_TABLE"


class ColorNamesUnavailableError(ValueError):
    """Color Names need a color patch; grayscale (night) input has none."""


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    lin = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    m = np.array([[0.4124564, 0.3575761, 0.1804375],
                  [0.2126729, 0.7151522, 0.0721750],
                  [0.0193339, 0.1191920, 0.9503041]])
    xyz = lin @ m.T / np.array([0.95047, 1.0, 1.08883])
    f = np.where(xyz > (6 / 29) ** 3, np.cbrt(xyz), xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    return np.stack([116 * f[..., 1] - 16,
                     500 * (f[..., 0] - f[..., 1]),
                     200 * (f[..., 1] - f[..., 2])], axis=-1)


def bin_centers() -> np.ndarray:
    """RGB value (0-255 scale) at the center of every bin, in table row order."""
    levels = np.arange(32) * 8 + 3.5
    b, g, r = np.meshgrid(levels, levels, levels, indexing="ij")
    return np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)


def build_table(sigma: float = 20.0) -> np.ndarray:
    """Soft assignment of every RGB bin to the prototypes by CIELab distance."""
    lab = srgb_to_lab(bin_centers() / 255.0)
    proto = srgb_to_lab(PROTOTYPES)
    d2 = ((lab[:, None, :] - proto[None, :, :]) ** 2).sum(-1)
    logits = -d2 / (2 * sigma ** 2)
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=1, keepdims=True)


def write_table(table: np.ndarray, path) -> None:
    rows = np.hstack([bin_centers(), table])
    with gzip.open(path, "wt") as fh:
        np.savetxt(fh, rows, fmt=["%.1f"] * 3 + ["%.8f"] * N_CHANNELS)


def read_table(path) -> np.ndarray:
    path = Path(path)
    suffixes = "".join(path.suffixes)
    if path.suffix == ".npy":
        table = np.load(path)
    elif path.suffix == ".mat":
        from scipy.io import loadmat
        table = loadmat(path)["w2c"]
    else:
        opener = gzip.open if suffixes.endswith(".gz") else open
        with opener(path, "rt") as fh:
            table = np.loadtxt(fh)
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] != N_BINS or table.shape[1] not in (11, 14):
        raise ValueError(f"{path}: expected {N_BINS} rows of 11 or 14 columns, got {table.shape}")
    table = table[:, -N_CHANNELS:]
    return table / table.sum(axis=1, keepdims=True)


@lru_cache(maxsize=4)
def _load(path: str) -> np.ndarray:
    table = read_table(path)
    table.setflags(write=False)
    return table


def load_table(path=None) -> np.ndarray:
    """Lookup table (32768, 11); ``$TAGTRACK_CN_TABLE`` overrides the bundled file."""
    if path is None:
        path = os.environ.get(TABLE_ENV) or DEFAULT_TABLE
    return _load(str(path))


def bin_index(rgb: np.ndarray) -> np.ndarray:
    q = np.clip(np.rint(np.asarray(rgb) * 255.0), 0, 255).astype(np.int64) // 8
    return q[..., 0] + 32 * q[..., 1] + 1024 * q[..., 2]


def cell_average(values: np.ndarray, cell: int) -> np.ndarray:
    """Average ``(H, W, C)`` values over ``cell x cell`` blocks (grid rounded, >= 1)."""
    h, w, c = values.shape
    gh, gw = max(1, int(round(h / cell))), max(1, int(round(w / cell)))
    if gh * cell == h and gw * cell == w:
        return values.reshape(gh, cell, gw, cell, c).mean(axis=(1, 3))
    ry = np.minimum(np.arange(h) * gh // h, gh - 1)
    rx = np.minimum(np.arange(w) * gw // w, gw - 1)
    idx = (ry[:, None] * gw + rx[None, :]).ravel()
    counts = np.bincount(idx, minlength=gh * gw)
    out = np.stack([np.bincount(idx, weights=values[..., k].ravel(), minlength=gh * gw)
                    for k in range(c)], axis=-1)
    return (out / counts[:, None]).reshape(gh, gw, c)


def color_names_features(patch: np.ndarray, cell: int, table=None) -> np.ndarray:
    """Return a ``(rows/cell, cols/cell, 11)`` grid of mean color-name probabilities."""
    patch = np.asarray(patch)
    if patch.ndim != 3 or patch.shape[2] != 3:
        raise ColorNamesUnavailableError("color names require an RGB patch")
    if cell < 1:
        raise ValueError("cell must be >= 1")
    if table is None:
        table = load_table()
    probs = table[bin_index(patch)]
    return cell_average(probs, cell)
