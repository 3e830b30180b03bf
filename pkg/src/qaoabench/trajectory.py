"""Optimization trajectory record shared by learned and classical optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """Parameter iterates with their raw and normalized costs.

    ``costs[t]`` is the exact expectation at ``thetas[t]``; a gradient
    optimizer unrolled for T steps records T+1 entries.
    """

    thetas: list[np.ndarray] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    normalized_costs: list[float] = field(default_factory=list)

    def append(self, theta: np.ndarray, cost: float, normalized: float):
        self.thetas.append(np.asarray(theta, dtype=float).copy())
        self.costs.append(float(cost))
        self.normalized_costs.append(float(normalized))

    def __len__(self) -> int:
        return len(self.costs)
