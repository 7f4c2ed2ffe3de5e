"""Initial money allocation across vertices.

A fixed budget of n * M is split in proportion to degree^theta. theta = 0
gives every vertex M; positive theta concentrates money on hubs, negative
theta on the periphery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MoneyAllocation:
    balances: np.ndarray
    per_vertex_budget: float  # M
    theta: float

    @property
    def total(self) -> float:
        return float(self.balances.sum())


def allocate_money(degrees, per_vertex_budget: float, theta: float) -> MoneyAllocation:
    """Split a total budget of n * M across vertices with weight k^theta.

    Degree-zero vertices get weight 0 when theta > 0 (they cannot be
    reached by a hub-favouring rule), weight 1 when theta == 0, and the
    weight of a degree-1 vertex when theta < 0 so the periphery rule stays
    finite.

    Raises ValueError for a negative budget or when every weight is zero.
    """
    degrees = np.asarray(degrees, dtype=np.float64)
    if degrees.ndim != 1 or len(degrees) == 0:
        raise ValueError("degree sequence must be a non-empty 1-d array")
    if np.any(degrees < 0):
        raise ValueError("degrees must be non-negative")
    if per_vertex_budget < 0:
        raise ValueError(f"money budget must be >= 0, got {per_vertex_budget}")

    if theta == 0.0:
        weights = np.ones_like(degrees)
    else:
        zero = degrees == 0
        weights = np.where(zero, 1.0, degrees) ** theta
        if theta > 0:
            weights[zero] = 0.0
    total_weight = weights.sum()
    if total_weight == 0.0:
        raise ValueError("all allocation weights are zero; cannot split the budget")

    n = len(degrees)
    balances = weights * (n * per_vertex_budget / total_weight)
    return MoneyAllocation(balances=balances, per_vertex_budget=float(per_vertex_budget), theta=float(theta))
