"""Appearance features around a tag-box: HOG (+ Color Names in day mode)."""
from __future__ import annotations

import numpy as np

from ..geometry import TagBox
from .colornames import ColorNamesUnavailableError, color_names_features, load_table
from .config import FeatureConfig
from .frame import Frame, to_gray
from .grid import FeatureBlock, to_common_grid
from .hog import hog_features
from .patch import PatchOutsideFrameError, extract_patch, search_extent

__all__ = [
    "ColorNamesUnavailableError", "FeatureBlock", "FeatureConfig", "Frame",
    "PatchOutsideFrameError", "color_names_features", "extract_features",
    "extract_patch", "feature_blocks", "hog_features", "load_table",
    "normalize_features", "sample_size_for", "search_extent", "to_common_grid",
]


def sample_size_for(tb: TagBox, cfg: FeatureConfig) -> tuple[int, int]:
    """Fixed patch size (rows, cols) used for every sample of a track.

    The search extent is rounded to a multiple of the cell sizes' lcm so that
    every block tiles the patch exactly.
    """
    ext_w, ext_h = search_extent(tb, 1.0, cfg)
    m = cfg.cell_lcm
    rows = max(2, int(round(ext_h / m))) * m
    cols = max(2, int(round(ext_w / m))) * m
    return rows, cols


def feature_blocks(patch: np.ndarray, cfg: FeatureConfig) -> list[FeatureBlock]:
    blocks = [FeatureBlock("hog", cfg.hog_cell, hog_features(to_gray(patch), cfg.hog_cell))]
    if cfg.uses_color_names:
        if patch.ndim != 3:
            raise ColorNamesUnavailableError(
                "day mode needs color frames; use mode='night' for grayscale input")
        blocks.append(FeatureBlock("cn", cfg.cn_cell, color_names_features(patch, cfg.cn_cell)))
    return blocks


def normalize_features(x: np.ndarray, cfg: FeatureConfig) -> np.ndarray:
    """Zero-mean every channel, then scale each feature block to unit mean power."""
    x = x - x.mean(axis=(0, 1), keepdims=True)
    splits = [31, 31 + 11] if cfg.uses_color_names else [31]
    out = []
    start = 0
    for stop in splits:
        block = x[:, :, start:stop]
        power = np.mean(block * block)
        out.append(block / np.sqrt(power) if power > 1e-20 else block)
        start = stop
    return np.concatenate(out, axis=2)


def extract_features(frame: Frame, tb: TagBox, scale: float, cfg: FeatureConfig,
                     sample_size: tuple[int, int]) -> np.ndarray:
    """Normalized (rows, cols, D) feature stack of the search area at ``scale``."""
    patch = extract_patch(frame, tb, scale, cfg, out_size=sample_size)
    return normalize_features(
        to_common_grid(feature_blocks(patch, cfg), cfg.interpolation), cfg)
