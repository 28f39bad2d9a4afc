"""Online sizing of the type-1 preamble pool.

The base station never sees the arrival rates. It observes the number of
active devices K1 each slot, turns it into an estimate of the aggregate
arrival rate and takes one stochastic-gradient step on
``f(z) = (rate * z - z**N1) / N1`` with ``z = 1 - 1/L1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

Z_MARGIN = 1e-6


def estimate_total_rate(k1: int, l1: int) -> float:
    """Aggregate arrival-rate estimate ``k1 * exp(-k1 / l1)``.

    Follows from the Poisson approximation of the active count: if K1 has
    mean ``d`` then throughput ``d * exp(-d / l1)`` must match the offered
    load in steady state.
    """
    if k1 < 0:
        raise ValueError(f"k1 must be >= 0, got {k1}")
    if l1 < 1:
        raise ValueError(f"l1 must be >= 1, got {l1}")
    return k1 * math.exp(-k1 / l1)


def emitted_l1(z: float, l_total: int, floor: int = 1) -> int:
    l1 = math.ceil(max(1.0, 1.0 / (1.0 - z)))
    return min(max(l1, floor), l_total - 1)


@dataclass(frozen=True)
class ControllerState:
    z: float
    mu: float
    n1: int
    l_total: int
    l1_min_floor: int = 1

    def __post_init__(self):
        if not 0 <= self.z < 1:
            raise ValueError(f"z must be in [0, 1), got {self.z}")
        if self.mu <= 0:
            raise ValueError(f"step size must be > 0, got {self.mu}")
        if self.n1 < 1:
            raise ValueError(f"n1 must be >= 1, got {self.n1}")
        if self.l_total < 2:
            raise ValueError(f"total pool must be >= 2, got {self.l_total}")
        if not 1 <= self.l1_min_floor <= self.l_total - 1:
            raise ValueError(f"l1_min_floor must be in [1, {self.l_total - 1}], got {self.l1_min_floor}")

    @classmethod
    def initial(cls, n1: int, l_total: int, mu: float | None = None, l1_min_floor: int = 1) -> "ControllerState":
        """Start from the largest admissible pool, ``L1(0) = L - 1``."""
        if mu is None:
            mu = 0.01 / n1
        return cls(z=1.0 - 1.0 / (l_total - 1), mu=mu, n1=n1, l_total=l_total, l1_min_floor=l1_min_floor)

    @property
    def l1(self) -> int:
        return emitted_l1(self.z, self.l_total, self.l1_min_floor)


def gradient_step(z: float, k1: int, l1: int, mu: float, n1: int) -> float:
    """Projected ascent step on z. ``l1`` is the pool that produced ``k1``."""
    z = z + (mu / n1) * (k1 * math.exp(-k1 / l1) - n1 * z ** float(n1 - 1))
    return min(max(z, 0.0), 1.0 - Z_MARGIN)


def update(state: ControllerState, k1: int) -> tuple[ControllerState, int]:
    """Feed one observed active count; return the new state and the next L1."""
    if k1 < 0:
        raise ValueError(f"k1 must be >= 0, got {k1}")
    z = gradient_step(state.z, k1, state.l1, state.mu, state.n1)
    new = replace(state, z=z)
    return new, new.l1
