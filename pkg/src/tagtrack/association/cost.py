from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import BoundingBox, TagBox, normalized_center_distance, overlap_fraction
from .hungarian import INFEASIBLE

ZERO_OVERLAP_COST = 1.0


@dataclass
class AssociationConfig:
    delta: float = 0.5
    age_threshold: int = 10
    gate_cost: float = 1.0
    reinit_fraction: float = 0.4
    max_carry_rate: float = 0.25

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.age_threshold < 1:
            raise ValueError("age_threshold must be >= 1")
        if not 0 < self.reinit_fraction <= 1:
            raise ValueError("reinit_fraction must be in (0, 1]")


def pair_cost(db: BoundingBox, tb: TagBox, delta: float = 0.5) -> float:
    """Detection / tag-box affinity cost: -log(overlap) + delta * center distance / diagonal.

    Pairs that do not overlap cost exactly 1.
    """
    ov = overlap_fraction(db, tb)
    if ov <= 0.0:
        return ZERO_OVERLAP_COST
    return -math.log(ov) + delta * normalized_center_distance(db, tb)


def is_feasible(db: BoundingBox, tb: TagBox, cfg: AssociationConfig) -> bool:
    return overlap_fraction(db, tb) > 0.0 and pair_cost(db, tb, cfg.delta) < cfg.gate_cost


def gated_cost(db: BoundingBox, tb: TagBox, cfg: AssociationConfig) -> float:
    """``pair_cost`` for matching: infeasible pairs map to the ``INFEASIBLE`` sentinel."""
    if overlap_fraction(db, tb) <= 0.0:
        return INFEASIBLE
    c = pair_cost(db, tb, cfg.delta)
    return c if c < cfg.gate_cost else INFEASIBLE


def build_cost_matrix(detections, tag_boxes, cfg: AssociationConfig | None = None) -> np.ndarray:
    """|detections| x |tag_boxes| matrix of gated costs."""
    cfg = cfg or AssociationConfig()
    out = np.full((len(detections), len(tag_boxes)), INFEASIBLE)
    for j, db in enumerate(detections):
        for i, tb in enumerate(tag_boxes):
            out[j, i] = gated_cost(db, tb, cfg)
    return out
