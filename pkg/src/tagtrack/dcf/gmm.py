"""Compact training set: a fixed-capacity mixture of weighted sample means."""
from __future__ import annotations

import numpy as np


class GmmSampleSpace:
    """Up to ``max_components`` weighted means of (projected) feature stacks.

    New samples enter with weight ``learning_rate`` while the old weights decay
    by ``1 - learning_rate``. When capacity is exceeded the lightest component
    is dropped if its weight is below ``drop_threshold``; otherwise the two
    closest components (squared L2 between means) are merged.
    """

    def __init__(self, max_components: int = 30, learning_rate: float = 0.09,
                 drop_threshold: float = 1e-4):
        if max_components < 1:
            raise ValueError("max_components must be >= 1")
        self.max_components = max_components
        self.learning_rate = learning_rate
        self.drop_threshold = drop_threshold
        self.means: list[np.ndarray] = []
        self.weights = np.zeros(0)
        self._dist = np.zeros((0, 0))

    def __len__(self):
        return len(self.means)

    @property
    def shape(self):
        return self.means[0].shape if self.means else None

    def _distances_to(self, sample: np.ndarray) -> np.ndarray:
        return np.array([np.sum((m - sample) ** 2) for m in self.means])

    def update(self, sample: np.ndarray) -> "GmmSampleSpace":
        sample = np.array(sample, dtype=np.float64)
        if self.means and sample.shape != self.shape:
            raise ValueError(f"sample shape {sample.shape} != component shape {self.shape}")
        if not self.means:
            self.means = [sample]
            self.weights = np.ones(1)
            self._dist = np.zeros((1, 1))
            return self

        gamma = self.learning_rate
        d_new = self._distances_to(sample)
        self.weights = self.weights * (1.0 - gamma)
        dup = np.flatnonzero(d_new == 0.0)
        if dup.size:
            self.weights[dup[0]] += gamma
        else:
            self.means.append(sample)
            self.weights = np.append(self.weights, gamma)
            n = len(self.means)
            dist = np.zeros((n, n))
            dist[:-1, :-1] = self._dist
            dist[-1, :-1] = dist[:-1, -1] = d_new
            self._dist = dist
            if n > self.max_components:
                self._reduce()
        self.weights = self.weights / self.weights.sum()
        return self

    def _reduce(self):
        lightest = int(np.argmin(self.weights))
        if self.weights[lightest] < self.drop_threshold:
            self._remove(lightest)
            return
        d = self._dist + np.diag(np.full(len(self.means), np.inf))
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        i, j = min(i, j), max(i, j)
        wi, wj = self.weights[i], self.weights[j]
        w = wi + wj
        # written as an offset so identical means merge exactly
        self.means[i] = self.means[i] + (wj / w) * (self.means[j] - self.means[i])
        self.weights[i] = w
        self._remove(j)
        d_i = self._distances_to(self.means[i])
        self._dist[i, :] = d_i
        self._dist[:, i] = d_i

    def _remove(self, k: int):
        del self.means[k]
        self.weights = np.delete(self.weights, k)
        self._dist = np.delete(np.delete(self._dist, k, axis=0), k, axis=1)

    def stacked(self) -> np.ndarray:
        return np.stack(self.means)

    def copy(self) -> "GmmSampleSpace":
        other = GmmSampleSpace(self.max_components, self.learning_rate, self.drop_threshold)
        other.means = [m.copy() for m in self.means]
        other.weights = self.weights.copy()
        other._dist = self._dist.copy()
        return other


def update_sample_space(space: GmmSampleSpace, sample: np.ndarray) -> GmmSampleSpace:
    return space.update(sample)
