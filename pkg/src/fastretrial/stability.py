"""Closed-form stability conditions and pool sizing for fast retrial.

With N1 devices all backlogged, each one succeeds with probability
``(1 - 1/L1) ** (N1 - 1)``. The per-device queues are positive recurrent
whenever the mean arrival rate stays strictly below that full-load
success probability; everything in this module is built on that test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class StabilityReport:
    mean_rate: float
    full_load_success: float
    stable: bool
    margin: float


def _mean_rate(rates: float | Sequence[float]) -> float:
    if isinstance(rates, (int, float)):
        return float(rates)
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("empty rate list")
    return sum(rates) / len(rates)


def full_load_success_prob(n1: int, l1: int) -> float:
    if n1 < 1:
        raise ValueError(f"n1 must be >= 1, got {n1}")
    if l1 < 1:
        raise ValueError(f"l1 must be >= 1, got {l1}")
    return (1.0 - 1.0 / l1) ** (n1 - 1)


def check_stability(rates: float | Sequence[float], l1: int, n1: int | None = None) -> StabilityReport:
    """Evaluate the sufficient stability condition.

    ``rates`` is either the per-device list (N1 is its length) or a single
    common rate, in which case ``n1`` must be given.
    """
    if n1 is None:
        if isinstance(rates, (int, float)):
            raise ValueError("n1 is required with a scalar rate")
        n1 = len(rates)
    lam = _mean_rate(rates)
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f"invalid arrival rate {lam}")
    p = full_load_success_prob(n1, l1)
    margin = p - lam
    return StabilityReport(mean_rate=lam, full_load_success=p, stable=margin > 0, margin=margin)


def max_stable_n1(lambda_max: float, l1: int) -> tuple[int, float]:
    """Largest admissible device count for a rate cap.

    Returns ``(exact_bound, exp_bound)``: the largest integer N1 with
    ``lambda_max < (1 - 1/l1) ** (N1 - 1)`` (0 if none) and the looser
    ``1 + l1 * ln(1 / lambda_max)`` obtained from ``1 - x <= exp(-x)``.
    """
    if not 0 < lambda_max <= 1:
        raise ValueError(f"lambda_max must be in (0, 1], got {lambda_max}")
    if l1 < 2:
        raise ValueError(f"l1 must be >= 2, got {l1}")
    exp_bound = 1.0 + l1 * math.log(1.0 / lambda_max)
    q = 1.0 - 1.0 / l1
    n = max(0, math.floor(1.0 + math.log(lambda_max) / math.log(q)))
    # the log estimate can be off by one at the boundary; settle it exactly
    while n >= 1 and not lambda_max < q ** (n - 1):
        n -= 1
    while lambda_max < q**n:
        n += 1
    return n, exp_bound


def min_stable_l1(rates: float | Sequence[float], n1: int) -> int:
    """Smallest pool size whose full-load success exceeds the mean rate."""
    lam = _mean_rate(rates)
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f"invalid arrival rate {lam}")
    if lam >= 1:
        raise ValueError(f"mean rate {lam} >= 1 cannot be stabilised by any pool size")
    if n1 < 1:
        raise ValueError(f"n1 must be >= 1, got {n1}")
    if n1 == 1:
        return 1
    if lam == 0:
        return 2
    l1 = max(1, math.ceil(1.0 / (1.0 - lam ** (1.0 / (n1 - 1)))))
    while l1 > 1 and check_stability(lam, l1 - 1, n1).stable:
        l1 -= 1
    while not check_stability(lam, l1, n1).stable:
        l1 += 1
    return l1


def objective(z: float, total_rate: float, n1: int) -> float:
    """f(z) = (total_rate * z - z**n1) / n1, maximised by the pool controller."""
    return (total_rate * z - z**n1) / n1


def objective_grad(z: float, total_rate: float, n1: int) -> float:
    return total_rate / n1 - z ** (n1 - 1)


def optimal_z(total_rate: float, n1: int) -> float:
    """Unique maximiser of :func:`objective` on [0, 1)."""
    if n1 < 2:
        raise ValueError(f"n1 must be >= 2, got {n1}")
    if not 0 <= total_rate < n1:
        raise ValueError(f"total rate must lie in [0, n1), got {total_rate}")
    return (total_rate / n1) ** (1.0 / (n1 - 1))


def optimal_l1(total_rate: float, n1: int) -> float:
    """Continuous pool size 1 / (1 - z*) at which the stability condition is tight."""
    return 1.0 / (1.0 - optimal_z(total_rate, n1))
