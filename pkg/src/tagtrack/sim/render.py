from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from ..features.frame import Frame
from .config import SceneConfig
from .scene import SceneState, agent_pixels, agent_specs, occluder_mask

_TEX = 64


@lru_cache(maxsize=8)
def floor_texture(cfg: SceneConfig) -> np.ndarray:
    """Static RGB floor: smooth mottling plus fine straw-like speckle."""
    rng = np.random.default_rng([cfg.seed, 5])
    h, w = cfg.height, cfg.width
    coarse = gaussian_filter(rng.standard_normal((h, w)), 12) * 6.0
    fine = gaussian_filter(rng.standard_normal((h, w)), 1.0) * 0.08
    base = np.array([0.46, 0.42, 0.36])
    img = base[None, None, :] + (0.05 * coarse + fine)[..., None]
    return np.clip(img, 0, 1).astype(np.float32)


@lru_cache(maxsize=64)
def agent_texture(texture_seed: int) -> np.ndarray:
    """Body pattern on a (_TEX, _TEX) grid spanning the unit disk."""
    rng = np.random.default_rng(texture_seed)
    t = gaussian_filter(rng.standard_normal((_TEX, _TEX)), 2.0)
    t /= t.std() + 1e-12
    # a few dark patches make each body distinct
    yy, xx = np.mgrid[0:_TEX, 0:_TEX]
    for _ in range(int(rng.integers(2, 5))):
        px, py, r = rng.uniform(10, _TEX - 10), rng.uniform(10, _TEX - 10), rng.uniform(4, 9)
        t -= 2.0 * np.exp(-((xx - px) ** 2 + (yy - py) ** 2) / (2 * r * r))
    return (0.12 * t).astype(np.float32)


def _shadow(cfg: SceneConfig) -> np.ndarray:
    x = (np.arange(cfg.width) + 0.5) / cfg.width
    y = (np.arange(cfg.height) + 0.5) / cfg.height
    return -cfg.shadow * np.clip(1.2 * x[None, :] + 0.4 * y[:, None] - 0.6, 0, 1)


def render_frame(state: SceneState, cfg: SceneConfig, as_uint8: bool = True) -> Frame:
    """Rasterize one state: floor, agents in index order, then the occluder."""
    mode = cfg.mode_at(state.frame)
    img = floor_texture(cfg).copy()
    specs = agent_specs(cfg)
    for k, ag in enumerate(state.agents):
        xs, ys, (x0, y0) = agent_pixels(ag, cfg.width, cfg.height)
        if xs.size == 0 or ys.size == 0:
            continue
        dx, dy = xs - ag.cx, ys - ag.cy
        c, s = math.cos(ag.theta), math.sin(ag.theta)
        u = (dx * c + dy * s) / ag.a
        v = (-dx * s + dy * c) / ag.b
        r = np.sqrt(u * u + v * v)
        # one-pixel soft edge, alpha 0.5 on the ellipse itself
        alpha = np.clip((1.0 - r) * ag.b + 0.5, 0.0, 1.0)
        if not alpha.any():
            continue
        tex = map_coordinates(agent_texture(specs[k].texture_seed),
                              [(v + 1) * (_TEX - 1) / 2, (u + 1) * (_TEX - 1) / 2],
                              order=1, mode="nearest")
        shade = 1.0 - 0.25 * np.clip(r, 0, 1) ** 2
        body = (np.array(specs[k].tint)[None, None, :] * shade[..., None]
                + tex[..., None])
        region = img[y0:y0 + alpha.shape[0], x0:x0 + alpha.shape[1]]
        region += alpha[..., None] * (body - region)
    if state.occluder is not None:
        oc = cfg.occluder
        L = oc.length
        x0 = max(0, int(state.occluder[0] - L))
        y0 = max(0, int(state.occluder[1] - L))
        x1 = min(cfg.width, int(state.occluder[0] + L) + 1)
        y1 = min(cfg.height, int(state.occluder[1] + L) + 1)
        if x1 > x0 and y1 > y0:
            xs = (np.arange(x0, x1) + 0.5)[None, :]
            ys = (np.arange(y0, y1) + 0.5)[:, None]
            m = occluder_mask(xs, ys, state.occluder, L)
            region = img[y0:y1, x0:x1]
            region[m] += oc.opacity * (np.array([0.12, 0.1, 0.08]) - region[m])
    if mode == "night":
        gray = img @ np.array([0.299, 0.587, 0.114], dtype=np.float32)
        img = gray + _shadow(cfg).astype(np.float32)
    img = np.clip(img * cfg.gain_at(state.frame), 0.0, 1.0)
    if as_uint8:
        return Frame(np.round(img * 255).astype(np.uint8))
    return Frame(img.astype(np.float32))
