from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

INFEASIBLE = 1e6


@dataclass
class Matching:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    unmatched_rows: list[int] = field(default_factory=list)
    unmatched_cols: list[int] = field(default_factory=list)

    def total(self, cost: np.ndarray) -> float:
        return float(sum(cost[r, c] for r, c in self.pairs))


def hungarian_assign(cost, infeasible: float = INFEASIBLE) -> Matching:
    """Minimum-cost one-to-one assignment; entries ``>= infeasible`` are never paired."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n_rows, n_cols = cost.shape
    if cost.size == 0:
        return Matching([], list(range(n_rows)), list(range(n_cols)))
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost entries must be finite; encode infeasible pairs as a large value")
    rows, cols = linear_sum_assignment(np.minimum(cost, infeasible))
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols) if cost[r, c] < infeasible]
    used_r = {r for r, _ in pairs}
    used_c = {c for _, c in pairs}
    return Matching(pairs,
                    [r for r in range(n_rows) if r not in used_r],
                    [c for c in range(n_cols) if c not in used_c])
