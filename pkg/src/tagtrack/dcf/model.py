from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..features import FeatureConfig, Frame, extract_features, sample_size_for
from ..geometry import TagBox
from .config import TrackerConfig
from .gmm import GmmSampleSpace
from .solver import (FilterSystem, fft2, fft2_stack, gauss_newton_projection, ifft2_real,
                     solve_filters)


class DegenerateSampleError(ValueError):
    """The first sample has no variance to learn from."""


class FeatureShapeError(ValueError):
    """A feature stack does not match the model's grid or channel count."""


@dataclass
class FilterModel:
    """Learned state of one track's correlation filter."""

    filters: np.ndarray            # (rows, cols, C) real, spatial domain
    projection: np.ndarray         # (D, C)
    reg_weights: np.ndarray        # (rows, cols)
    label: np.ndarray              # (rows, cols), peak at the origin
    label_sigma: tuple[float, float]
    sample_space: GmmSampleSpace
    sample_size: tuple[int, int]   # patch pixels (rows, cols)
    ref_size: tuple[float, float]  # tag-box (w, h) at initialization
    config: TrackerConfig
    feature_config: FeatureConfig
    _filters_fc: np.ndarray | None = field(default=None, repr=False)

    @property
    def grid(self) -> tuple[int, int]:
        return self.label.shape

    @property
    def n_channels(self) -> int:
        return self.projection.shape[0]

    @property
    def n_basis(self) -> int:
        return self.projection.shape[1]

    @property
    def basis_filters(self) -> np.ndarray:
        """Frequency-domain basis filters, ``(rows, cols, C)`` complex."""
        return fft2(self.filters)

    def set_filters(self, filters: np.ndarray) -> None:
        self.filters = filters
        self._filters_fc = None

    def project(self, features: np.ndarray) -> np.ndarray:
        return features @ self.projection

    def system(self) -> FilterSystem:
        means = self.sample_space.stacked()
        return FilterSystem(fft2_stack(means),
                            self.sample_space.weights, self.label, self.reg_weights)

    def objective(self) -> float:
        """Weighted label-fitting error plus spatial regularization over the sample space."""
        return self.system().objective(self.filters)


def gaussian_label(grid: tuple[int, int], sigma: tuple[float, float]) -> np.ndarray:
    """Periodic Gaussian with its peak at grid index (0, 0)."""
    rows, cols = grid
    ur = np.fft.fftfreq(rows) * rows
    uc = np.fft.fftfreq(cols) * cols
    sr, sc = sigma
    return np.exp(-0.5 * ((ur[:, None] / sr) ** 2 + (uc[None, :] / sc) ** 2))


def regularization_weights(grid: tuple[int, int], w_min: float, slope: float) -> np.ndarray:
    """Quadratic bowl, lowest at the patch center and rising towards the edges."""
    rows, cols = grid
    dr = (np.arange(rows) - (rows - 1) / 2.0) / (rows / 2.0)
    dc = (np.arange(cols) - (cols - 1) / 2.0) / (cols / 2.0)
    return w_min + slope * (dr[:, None] ** 2 + dc[None, :] ** 2)


def pca_projection(x: np.ndarray, n_basis: int) -> np.ndarray:
    """Top principal directions of the per-cell channel vectors, sign-fixed."""
    flat = x.reshape(-1, x.shape[2])
    cov = flat.T @ flat
    vals, vecs = np.linalg.eigh(cov)
    vecs = vecs[:, np.argsort(vals)[::-1][:n_basis]]
    signs = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    signs[signs == 0] = 1
    return vecs * signs


def label_sigma_for(grid: tuple[int, int], fcfg: FeatureConfig, factor: float):
    # the tag-box spans grid / sqrt(search_area_factor) cells on each axis
    k = math.sqrt(fcfg.search_area_factor)
    return (grid[0] / k * factor, grid[1] / k * factor)


def joint_optimize_projection(model: FilterModel, sample: np.ndarray,
                              return_history: bool = False):
    """First-frame learning of filters and projection from one full-channel sample.

    With as many basis filters as channels the factorization is exact, so only
    the filters are optimized (``first_frame_cg_iters`` PCG iterations).
    """
    cfg = model.config
    if model.n_basis == model.n_channels:
        system = FilterSystem(fft2(model.project(sample))[None], np.ones(1),
                              model.label, model.reg_weights)
        f, history = solve_filters(system, model.filters, cfg.first_frame_cg_iters)
        model.set_filters(f)
    else:
        per_step = max(1, cfg.first_frame_cg_iters // cfg.first_frame_gn_iters)
        f, p, history = gauss_newton_projection(
            sample, model.projection, model.filters, model.label, model.reg_weights,
            cfg.first_frame_gn_iters, per_step, cfg.projection_damping)
        model.projection = p
        model.set_filters(f)
    return (model, history) if return_history else model


def init_track_model(frame: Frame, tb: TagBox, cfg: TrackerConfig | None = None,
                     fcfg: FeatureConfig | None = None) -> FilterModel:
    cfg = cfg or TrackerConfig()
    fcfg = fcfg or FeatureConfig()
    size = sample_size_for(tb, fcfg)
    x = extract_features(frame, tb, 1.0, fcfg, size)
    # normalized blocks have unit power, so anything tiny is rounding residue
    if np.max(np.abs(x)) < 1e-9:
        raise DegenerateSampleError(f"no appearance variation inside the search area of {tb}")
    grid = x.shape[:2]
    n_basis = min(x.shape[2], cfg.n_basis)
    sigma = label_sigma_for(grid, fcfg, cfg.label_sigma_factor)
    model = FilterModel(
        filters=np.zeros(grid + (n_basis,)),
        projection=pca_projection(x, n_basis),
        reg_weights=regularization_weights(grid, cfg.reg_min, cfg.reg_slope),
        label=gaussian_label(grid, sigma),
        label_sigma=sigma,
        sample_space=GmmSampleSpace(cfg.n_components, cfg.learning_rate, cfg.drop_threshold),
        sample_size=size,
        ref_size=(tb.w, tb.h),
        config=cfg,
        feature_config=fcfg,
    )
    joint_optimize_projection(model, x)
    model.sample_space.update(model.project(x))
    return model


def compute_response(model: FilterModel, features: np.ndarray) -> np.ndarray:
    """Correlation response of the model to a full-channel feature stack."""
    if features.shape != model.grid + (model.n_channels,):
        raise FeatureShapeError(
            f"features {features.shape} do not match model grid {model.grid} "
            f"with {model.n_channels} channels")
    if model._filters_fc is None:
        model._filters_fc = np.conj(fft2(model.filters))
    z_f = fft2(model.project(features))
    return ifft2_real(np.sum(model._filters_fc * z_f, axis=2))


# least-squares quadratic fit on a 3x3 neighborhood: value = A @ coeffs
_DY, _DX = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], indexing="ij")
_QUAD = np.stack([np.ones(9), _DX.ravel(), _DY.ravel(), _DX.ravel() ** 2,
                  _DX.ravel() * _DY.ravel(), _DY.ravel() ** 2], axis=1)
_QUAD_PINV = np.linalg.pinv(_QUAD)


def _parabola_offset(left, center, right):
    denom = left - 2 * center + right
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def _quadratic_offset(patch: np.ndarray):
    _, b, c, d, e, f = _QUAD_PINV @ patch.ravel()
    hess = np.array([[2 * d, e], [e, 2 * f]])
    if np.linalg.det(hess) > 0 and hess[0, 0] < 0:
        dx, dy = np.linalg.solve(hess, [-b, -c])
        return float(np.clip(dy, -1, 1)), float(np.clip(dx, -1, 1))
    return (_parabola_offset(patch[0, 1], patch[1, 1], patch[2, 1]),
            _parabola_offset(patch[1, 0], patch[1, 1], patch[1, 2]))


def _fourier_newton(response: np.ndarray, y: float, x: float, n_iter: int):
    """Maximize the band-limited (Fourier series) interpolant of ``response``."""
    rows, cols = response.shape
    spec = np.fft.fft2(response) / response.size
    wy = 2j * np.pi * (np.fft.fftfreq(rows) * rows) / rows
    wx = 2j * np.pi * (np.fft.fftfreq(cols) * cols) / cols
    for _ in range(n_iter):
        terms = spec * np.exp(wy * y)[:, None] * np.exp(wx * x)[None, :]
        ty, tx = terms * wy[:, None], terms * wx[None, :]
        gy, gx = np.real(ty.sum()), np.real(tx.sum())
        hyy = np.real(np.sum(ty * wy[:, None]))
        hxx = np.real(np.sum(tx * wx[None, :]))
        hxy = np.real(np.sum(ty * wx[None, :]))
        det = hyy * hxx - hxy * hxy
        if det <= 0 or hyy >= 0:
            break
        y -= (hxx * gy - hxy * gx) / det
        x -= (hyy * gx - hxy * gy) / det
    value = np.real(np.sum(spec * np.exp(wy * y)[:, None] * np.exp(wx * x)[None, :]))
    return y, x, float(value)


def subpixel_peak(response: np.ndarray, newton_iters: int = 5):
    """Locate the response maximum with sub-cell precision.

    The integer argmax is refined by a quadratic fit to its 3x3 neighborhood and
    then by Newton steps on the response's Fourier-series interpolant (kept only
    if it stays within one cell). Returns ``(row, col, value)`` with offsets
    wrapped into ``[-grid/2, grid/2)``.
    """
    rows, cols = response.shape
    r0, c0 = np.unravel_index(int(np.argmax(response)), response.shape)
    idx_r = (r0 + np.array([-1, 0, 1])) % rows
    idx_c = (c0 + np.array([-1, 0, 1])) % cols
    dy, dx = _quadratic_offset(response[np.ix_(idx_r, idx_c)])
    pr = (r0 + rows // 2) % rows - rows // 2
    pc = (c0 + cols // 2) % cols - cols // 2
    value = float(response[r0, c0])
    if newton_iters:
        y, x, v = _fourier_newton(response, pr + dy, pc + dx, newton_iters)
        if abs(y - pr) <= 1 and abs(x - pc) <= 1 and v >= value:
            return y, x, v
    return pr + dy, pc + dx, value


def localize(model: FilterModel, frame: Frame, prior: TagBox,
             cfg: TrackerConfig | None = None, fcfg: FeatureConfig | None = None):
    """Search every scale around ``prior``; return the best tag-box and its peak score.

    The model is not modified.
    """
    cfg = cfg or model.config
    fcfg = fcfg or model.feature_config
    best = None
    for s in cfg.scale_set:
        w, h = _bounded_size(model, prior.w * s, prior.h * s, cfg)
        score, tb = _locate_at(model, frame, prior, w / prior.w, fcfg)
        if best is None or score > best[0]:
            best = (score, TagBox(tb.cx, tb.cy, w, h))
    score, tb = best
    # re-center the search area on the estimate; each pass shrinks the sub-cell bias
    for _ in range(cfg.refine_iters):
        new_score, moved = _locate_at(model, frame, tb, 1.0, fcfg)
        if new_score < score:
            break
        step = math.hypot(moved.cx - tb.cx, moved.cy - tb.cy)
        score, tb = new_score, TagBox(moved.cx, moved.cy, tb.w, tb.h)
        if step < 0.05 * tb.w / model.grid[1]:
            break
    return tb, score


def _locate_at(model: FilterModel, frame: Frame, center: TagBox, scale: float, fcfg):
    k = math.sqrt(fcfg.search_area_factor)
    rows, cols = model.grid
    x = extract_features(frame, center, scale, fcfg, model.sample_size)
    pr, pc, score = subpixel_peak(compute_response(model, x))
    dx = pc * (center.w * scale * k) / cols
    dy = pr * (center.h * scale * k) / rows
    return score, TagBox(center.cx + dx, center.cy + dy, center.w * scale, center.h * scale)


def _bounded_size(model: FilterModel, w: float, h: float, cfg: TrackerConfig):
    rw, rh = model.ref_size
    s = min(max(w / rw, cfg.min_scale), cfg.max_scale)
    return rw * s, rh * s


def train_filter(model: FilterModel, n_iter: int | None = None,
                 return_history: bool = False):
    """Warm-started PCG on the mixture-weighted objective with the projection fixed."""
    if len(model.sample_space) == 0:
        raise ValueError("train_filter needs at least one sample-space component")
    n_iter = model.config.update_cg_iters if n_iter is None else n_iter
    f, history = solve_filters(model.system(), model.filters, n_iter)
    model.set_filters(f)
    return (model, history) if return_history else model


def sample_at(model: FilterModel, frame: Frame, tb: TagBox) -> np.ndarray:
    """Projected training sample centered on ``tb`` (scale taken from ``tb`` itself)."""
    scale = tb.w / model.ref_size[0]
    ref = TagBox(tb.cx, tb.cy, model.ref_size[0], model.ref_size[1])
    x = extract_features(frame, ref, scale, model.feature_config, model.sample_size)
    return model.project(x)


def update_model(model: FilterModel, frame: Frame, tb: TagBox) -> FilterModel:
    """Sparse-schedule update: add the current sample, then retrain the filters."""
    model.sample_space.update(sample_at(model, frame, tb))
    return train_filter(model)
