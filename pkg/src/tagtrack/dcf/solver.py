"""Least-squares filter learning in the Fourier domain.

The filter ``f`` is a real ``(rows, cols, C)`` stack; the response to a
projected sample ``z`` is the circular cross-correlation
``r[u] = sum_c sum_v f_c[v] z_c[u + v]``, i.e. ``ifft(sum_c conj(F_c) Z_c)``.
Training minimizes

    J(f) = sum_l pi_l ||r_l - y||^2 + sum_c ||w * f_c||^2

whose normal equations are solved by preconditioned conjugate gradients.
"""
from __future__ import annotations

import numpy as np


def fft2(x):
    return np.fft.fft2(x, axes=(0, 1))


def ifft2_real(x):
    return np.fft.ifft2(x, axes=(0, 1)).real


def correlate(filters: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Summed circular cross-correlation of every channel pair, via FFT."""
    return ifft2_real(np.sum(np.conj(fft2(filters)) * fft2(z), axis=2))


class FilterSystem:
    """Normal equations ``(sum_l pi_l A_l^T A_l + W^2) f = sum_l pi_l A_l^T y``."""

    def __init__(self, samples_f: np.ndarray, weights: np.ndarray, label: np.ndarray,
                 reg_weights: np.ndarray):
        # samples_f: (L, rows, cols, C) spectra of the projected samples
        self.samples_f = samples_f
        self.weights = np.asarray(weights, dtype=np.float64)
        self.label = label
        self.label_f = fft2(label)
        self.w2 = reg_weights ** 2
        pz = self.weights[:, None, None, None] * samples_f
        # batched (C, L) @ (L, C) per frequency
        self.gram = np.matmul(np.moveaxis(pz, 0, -1), np.moveaxis(np.conj(samples_f), 0, 2))
        self.rhs = ifft2_real(np.conj(self.label_f)[..., None] * pz.sum(axis=0))
        self.const = float(self.weights.sum() * np.sum(label ** 2))
        diag = np.real(np.einsum("rscc->rsc", self.gram))
        self._precond = diag + self.w2.mean()

    def apply(self, f: np.ndarray) -> np.ndarray:
        out = ifft2_real(np.matmul(self.gram, fft2(f)[..., None])[..., 0])
        return out + self.w2[..., None] * f

    def precondition(self, r: np.ndarray) -> np.ndarray:
        return ifft2_real(fft2(r) / self._precond)

    def objective(self, f: np.ndarray) -> float:
        return float(np.sum(f * self.apply(f)) - 2 * np.sum(self.rhs * f) + self.const)

    def data_term(self, f: np.ndarray) -> float:
        """Weighted sum of squared response residuals, evaluated spatially."""
        total = 0.0
        for pi, zf in zip(self.weights, self.samples_f):
            r = ifft2_real(np.sum(np.conj(fft2(f)) * zf, axis=2))
            total += pi * np.sum((r - self.label) ** 2)
        return total


def pcg(apply, b, x0, precondition, n_iter, const=0.0, dot=None, tol=1e-14):
    """Preconditioned CG for SPD ``apply``; returns ``(x, objectives)``.

    ``objectives[k]`` is ``x_k.A x_k - 2 b.x_k + const`` after ``k`` iterations,
    computed from the maintained residual.
    """
    if dot is None:
        def dot(a, c):
            return float(np.sum(a * c))
    x = x0
    r = b - apply(x)
    objectives = [const - dot(x, b) - dot(x, r)]
    rz_ref = None
    z = precondition(r)
    p = z
    rz = dot(r, z)
    for _ in range(n_iter):
        if rz_ref is None:
            rz_ref = rz
        if rz <= tol * rz_ref or rz <= 0:
            break
        ap = apply(p)
        pap = dot(p, ap)
        if pap <= 0:
            break
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        objectives.append(const - dot(x, b) - dot(x, r))
        z = precondition(r)
        rz_new = dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, objectives


def solve_filters(system: FilterSystem, f0: np.ndarray, n_iter: int):
    return pcg(system.apply, system.rhs, f0, system.precondition, n_iter, system.const)


def closed_form_single_channel(z: np.ndarray, label: np.ndarray, reg: float) -> np.ndarray:
    """Per-frequency ridge solution for one sample, one channel and uniform ``w``."""
    zf = np.fft.fft2(z)
    yf = np.fft.fft2(label)
    return np.fft.ifft2(zf * np.conj(yf) / (np.abs(zf) ** 2 + reg ** 2)).real


# ---------------------------------------------------------------------------
# Joint filter / projection learning on a single (first-frame) sample.

def projection_objective(x_f: np.ndarray, projection: np.ndarray, f: np.ndarray,
                         label: np.ndarray, reg_weights: np.ndarray) -> float:
    z_f = x_f @ projection
    r = ifft2_real(np.sum(np.conj(fft2(f)) * z_f, axis=2))
    return float(np.sum((r - label) ** 2) + np.sum((reg_weights[..., None] * f) ** 2))


def _polar(m: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(m, full_matrices=False)
    return u @ vt


class _JointSystem:
    """Gauss-Newton linearization around ``(f0, P0)`` in unknowns ``(f, dP)``."""

    def __init__(self, x_f, projection, f0, label, reg_weights, damping):
        self.x_f = x_f
        self.z_f = x_f @ projection
        self.f0c = np.conj(fft2(f0))
        self.n = label.size
        self.label_f = fft2(label)
        self.w2 = reg_weights ** 2
        gx = np.abs(x_f) ** 2
        gf = np.abs(self.f0c) ** 2
        diag_p = np.einsum("rsd,rsc->dc", gx, gf) / self.n
        self.mu = damping * max(float(diag_p.mean()), 1e-12)
        self.pre_p = diag_p + self.mu
        self.pre_f = np.real(np.abs(self.z_f) ** 2) + self.w2.mean()
        self.rhs = (ifft2_real(np.conj(self.label_f)[..., None] * self.z_f),
                    self._adjoint_p(self.label_f))
        self.const = float(np.sum(label ** 2))

    def _adjoint_p(self, e_f):
        return np.real(np.einsum("rs,rsc,rsd->dc", np.conj(e_f), self.f0c, self.x_f)) / self.n

    def apply(self, v):
        f, dp = v
        r_f = np.sum(np.conj(fft2(f)) * self.z_f, axis=2)
        r_f = r_f + np.sum(self.x_f * (self.f0c @ dp.T), axis=2)
        out_f = ifft2_real(np.conj(r_f)[..., None] * self.z_f) + self.w2[..., None] * f
        out_p = self._adjoint_p(r_f) + self.mu * dp
        return _Pair(out_f, out_p)

    def precondition(self, v):
        f, dp = v
        return _Pair(ifft2_real(fft2(f) / self.pre_f), dp / self.pre_p)


class _Pair(tuple):
    """Vector in the joint (filter, projection-step) space."""

    def __new__(cls, f, p):
        return super().__new__(cls, (f, p))

    def __add__(self, other):
        return _Pair(self[0] + other[0], self[1] + other[1])

    def __sub__(self, other):
        return _Pair(self[0] - other[0], self[1] - other[1])

    def __mul__(self, s):
        return _Pair(self[0] * s, self[1] * s)

    __rmul__ = __mul__


def _pair_dot(a, b):
    return float(np.sum(a[0] * b[0]) + np.sum(a[1] * b[1]))


def gauss_newton_projection(x: np.ndarray, projection: np.ndarray, f: np.ndarray,
                            label: np.ndarray, reg_weights: np.ndarray, n_gn: int,
                            n_cg: int, damping: float = 1e-2):
    """Jointly refine filters and an orthonormal projection.

    Each outer step solves the linearized least-squares problem with ``n_cg``
    PCG iterations, retracts the projection onto orthonormal columns and
    backtracks until the true objective decreases, so the returned objective
    sequence is non-increasing.
    """
    x_f = fft2(x)
    objective = projection_objective(x_f, projection, f, label, reg_weights)
    history = [objective]
    for _ in range(n_gn):
        system = _JointSystem(x_f, projection, f, label, reg_weights, damping)
        v0 = _Pair(f, np.zeros_like(projection))
        rhs = _Pair(*system.rhs)
        (f_new, dp), _ = pcg(system.apply, rhs, v0, system.precondition, n_cg,
                             system.const, dot=_pair_dot)
        # step tangent to the orthonormal-column manifold at the current projection
        sym = projection.T @ dp
        dp = dp - projection @ (0.5 * (sym + sym.T))
        accepted = False
        for t in (1.0, 0.5, 0.25, 0.125):
            p_t = _polar(projection + t * dp)
            f_t = f + t * (f_new - f)
            obj_t = projection_objective(x_f, p_t, f_t, label, reg_weights)
            if obj_t <= objective:
                projection, f, objective = p_t, f_t, obj_t
                accepted = True
                break
        history.append(objective)
        if not accepted:
            break
    return f, projection, history


def fft2_stack(x):
    """Spectra of a stack ``(L, rows, cols, C)`` over the spatial axes."""
    return np.fft.fft2(x, axes=(1, 2))
