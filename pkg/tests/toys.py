"""Small hand-built filter models and reference computations."""
import numpy as np

from tagtrack.dcf import FilterModel, GmmSampleSpace, TrackerConfig
from tagtrack.dcf.model import gaussian_label
from tagtrack.features import FeatureConfig


def toy_model(rng, grid=(8, 8), n_channels=3, n_basis=None, reg=None):
    n_basis = n_basis or n_channels
    q, _ = np.linalg.qr(rng.standard_normal((n_channels, n_channels)))
    reg_weights = reg if reg is not None else rng.uniform(0.05, 1.0, grid)
    if np.isscalar(reg_weights):
        reg_weights = np.full(grid, float(reg_weights))
    return FilterModel(
        filters=rng.standard_normal(grid + (n_basis,)),
        projection=q[:, :n_basis],
        reg_weights=reg_weights,
        label=gaussian_label(grid, (1.0, 1.0)),
        label_sigma=(1.0, 1.0),
        sample_space=GmmSampleSpace(),
        sample_size=grid,
        ref_size=(float(grid[1]), float(grid[0])),
        config=TrackerConfig(),
        feature_config=FeatureConfig(mode="night"),
    )


def spatial_correlation(filters, z):
    """r[u] = sum_c sum_v f_c[v] z_c[(u + v) mod N], by explicit loops."""
    rows, cols, n = filters.shape
    out = np.zeros((rows, cols))
    for ur in range(rows):
        for uc in range(cols):
            acc = 0.0
            for vr in range(rows):
                for vc in range(cols):
                    acc += filters[vr, vc] @ z[(ur + vr) % rows, (uc + vc) % cols]
            out[ur, uc] = acc
    return out


def ridge_per_frequency(z, label, reg):
    """Minimizer of ||corr(f, z) - y||^2 + reg^2 ||f||^2, one channel, frequency by frequency."""
    zf, yf = np.fft.fft2(z), np.fft.fft2(label)
    # corr(f, z) has spectrum conj(F) Z, so conj(F) = conj(Z) Y / (|Z|^2 + reg^2)
    conj_f = np.conj(zf) * yf / (np.abs(zf) ** 2 + reg ** 2)
    return np.fft.ifft2(np.conj(conj_f)).real
