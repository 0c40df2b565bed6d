from __future__ import annotations

from dataclasses import dataclass


@dataclass
class TrackerConfig:
    """Correlation-filter hyperparameters.

    ``n_components`` (30), ``learning_rate`` (0.09), ``update_interval`` (2) and
    the first-frame iteration budget (10 Gauss-Newton / 120 CG) are the
    reference settings; the rest are engineering defaults.
    """

    n_components: int = 30
    learning_rate: float = 0.09
    update_interval: int = 2
    first_frame_gn_iters: int = 10
    first_frame_cg_iters: int = 120
    update_cg_iters: int = 5
    n_basis: int = 16
    scale_set: tuple = (0.98, 1.0, 1.02)
    label_sigma_factor: float = 1.0 / 6.0
    reg_min: float = 1e-2
    reg_slope: float = 1.0
    drop_threshold: float = 1e-4
    projection_damping: float = 1e-2
    min_scale: float = 0.5
    max_scale: float = 2.0
    refine_iters: int = 1

    def __post_init__(self):
        self.scale_set = tuple(float(s) for s in self.scale_set)
        counts = (self.n_components, self.update_interval, self.first_frame_gn_iters,
                  self.first_frame_cg_iters, self.update_cg_iters, self.n_basis)
        if min(counts) < 1:
            raise ValueError("iteration and component counts must be >= 1")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be >= 0")
        if not self.scale_set or min(self.scale_set) <= 0:
            raise ValueError("scales must be positive")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.reg_min <= 0:
            raise ValueError("reg_min must be positive (keeps the normal equations definite)")
