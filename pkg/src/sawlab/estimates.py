"""Small shared containers for Monte Carlo estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class EstimateWithError:
    """Point estimate with a standard error and provenance."""

    value: float
    std_error: float
    n_samples: int
    window: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.std_error) or self.std_error < 0:
            raise ValueError("std_error must be finite and >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def agrees_with(self, target: float, n_se: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.value - target) <= n_se * self.std_error + slack


def binomial_estimate(hits: int, total: int, window: str = "", **details) -> EstimateWithError:
    p = hits / total
    se = math.sqrt(max(p * (1.0 - p), 1.0 / total) / total)
    return EstimateWithError(p, se, total, window, dict(details))
