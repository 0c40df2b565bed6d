from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class FeatureConfig:
    hog_cell: int = 6
    cn_cell: int = 4
    mode: str = "day"
    search_area_factor: float = 4.0
    interpolation: str = "fourier"

    def __post_init__(self):
        if self.hog_cell < 1 or self.cn_cell < 1:
            raise ValueError("cell sizes must be >= 1")
        if self.search_area_factor <= 1:
            raise ValueError("search_area_factor must exceed 1")
        if self.mode not in ("day", "night"):
            raise ValueError(f"mode must be 'day' or 'night', got {self.mode!r}")
        if self.interpolation not in ("cubic", "fourier"):
            raise ValueError(f"interpolation must be 'cubic' or 'fourier', got {self.interpolation!r}")

    @property
    def uses_color_names(self) -> bool:
        return self.mode == "day"

    @property
    def cell_lcm(self) -> int:
        if not self.uses_color_names:
            return self.hog_cell
        return self.hog_cell * self.cn_cell // math.gcd(self.hog_cell, self.cn_cell)
