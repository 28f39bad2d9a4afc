"""Run scenarios over a horizon and summarise queue behaviour."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from fastretrial._kernel import simulate
from fastretrial.config import ConfigError, ScenarioConfig
from fastretrial.controller import ControllerState
from fastretrial.model import ArrivalLaw

log = logging.getLogger(__name__)

MIN_DETECT_LEN = 10_000
SLOPE_THRESHOLD = 1e-3
GROWTH_FACTOR = 4.0
SWEEP_SEED_STRIDE = 1000


def detect_instability(
    mean_queue: Sequence[float],
    slope_threshold: float = SLOPE_THRESHOLD,
    growth_factor: float = GROWTH_FACTOR,
) -> tuple[bool, float]:
    """Flag linear queue growth.

    Fits a least-squares line to the last half of the series. The run is
    unstable when that slope exceeds ``slope_threshold`` requests/slot and
    the final value exceeds ``growth_factor`` times the mean of the first
    quarter of the series.
    """
    q = np.asarray(mean_queue, dtype=float)
    if q.size < MIN_DETECT_LEN:
        raise ValueError(f"need at least {MIN_DETECT_LEN} samples, got {q.size}")
    tail = q[q.size // 2 :]
    x = np.arange(tail.size, dtype=float)
    x -= x.mean()
    slope = float(np.dot(x, tail - tail.mean()) / np.dot(x, x))
    first_quarter = float(q[: q.size // 4].mean())
    unstable = slope > slope_threshold and q[-1] > growth_factor * first_quarter
    return bool(unstable), slope


def batch_means_se(series: Sequence[float], n_batches: int = 50) -> float:
    """Standard error of the mean of an autocorrelated series via batch means."""
    x = np.asarray(series, dtype=float)
    m = x.size // n_batches
    if m < 1:
        raise ValueError("series too short for the requested batch count")
    means = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


@dataclass
class RunMetrics:
    config: ScenarioConfig
    k1_by_slot: np.ndarray
    successes_by_slot: np.ndarray
    arrivals_by_slot: np.ndarray
    l1_by_slot: np.ndarray
    z_by_slot: np.ndarray
    mean_queue_by_slot: np.ndarray
    max_queue_by_slot: np.ndarray
    # delay_counts[d] = number of post-warmup requests served after d slots
    delay_counts: np.ndarray
    served_by_device: np.ndarray
    final_queues: np.ndarray

    @property
    def warmup(self) -> int:
        return self.config.effective_warmup

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def collisions_by_slot(self) -> np.ndarray:
        return self.k1_by_slot - self.successes_by_slot

    def access_delays(self) -> np.ndarray:
        """Post-warmup per-request delays, expanded from the histogram."""
        return np.repeat(np.arange(self.delay_counts.size), self.delay_counts)

    @property
    def mean_delay(self) -> float:
        n = self.delay_counts.sum()
        if n == 0:
            return float("nan")
        return float(np.dot(np.arange(self.delay_counts.size), self.delay_counts) / n)

    @property
    def time_avg_queue(self) -> float:
        return float(self.mean_queue_by_slot[self.warmup :].mean())

    @property
    def max_queue(self) -> int:
        return int(self.max_queue_by_slot[self.warmup :].max())

    @property
    def time_avg_l1(self) -> float:
        return float(self.l1_by_slot[self.warmup :].mean())

    @property
    def collision_rate(self) -> float:
        tx = self.k1_by_slot[self.warmup :].sum()
        if tx == 0:
            return 0.0
        return float(self.collisions_by_slot[self.warmup :].sum() / tx)

    @property
    def throughput_per_device(self) -> np.ndarray:
        return self.served_by_device / (self.horizon - self.warmup)

    def instability(self) -> tuple[bool, float] | None:
        series = self.mean_queue_by_slot[self.warmup :]
        if series.size < MIN_DETECT_LEN:
            return None
        return detect_instability(series)

    @property
    def unstable(self) -> bool | None:
        res = self.instability()
        return None if res is None else res[0]

    def summary(self) -> dict[str, Any]:
        return {
            "time_avg_mean_queue": self.time_avg_queue,
            "max_queue": self.max_queue,
            "mean_access_delay": self.mean_delay,
            "collision_rate": self.collision_rate,
            "unstable": self.unstable,
            "final_l1": int(self.l1_by_slot[-1]),
            "time_avg_l1": self.time_avg_l1,
        }


def run(config: ScenarioConfig) -> RunMetrics:
    cfg = config
    if cfg.adaptive:
        ctl = ControllerState.initial(cfg.n1, cfg.l_total, cfg.effective_mu, cfg.l1_min_floor)
        z0, l1_fixed = ctl.z, 1
    else:
        z0, l1_fixed = 0.0, cfg.l1
    rng = np.random.default_rng(cfg.seed)
    out = simulate(
        rng,
        np.asarray(cfg.rates, dtype=np.float64),
        cfg.arrival_law is ArrivalLaw.POISSON,
        cfg.horizon,
        cfg.effective_warmup,
        l1_fixed,
        cfg.adaptive,
        z0,
        cfg.effective_mu,
        cfg.l_total,
        cfg.l1_min_floor,
    )
    k1, succ, arr, l1, z, meanq, maxq, hist, served, final = out
    last = np.flatnonzero(hist)
    hist = hist[: last[-1] + 1] if last.size else hist[:1]
    return RunMetrics(cfg, k1, succ, arr, l1, z, meanq, maxq, hist, served, final)


def sweep(
    base: ScenarioConfig,
    parameter: str,
    values: Sequence[Any],
    workers: int = 1,
) -> list[tuple[Any, RunMetrics]]:
    """Independent runs, one per value, seeded ``base.seed + 1000 * index``.

    Sweeping ``seed`` itself uses the given seeds verbatim.
    """
    if parameter not in {"lambda", "n1", "l1", "seed"}:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    configs = []
    for i, v in enumerate(values):
        cfg = base.with_param(parameter, v)
        if parameter != "seed":
            cfg = cfg.with_param("seed", (base.seed + SWEEP_SEED_STRIDE * i) % 2**64)
        configs.append(cfg)
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(c) for c in configs]
    log.debug("sweep over %s: %d runs", parameter, len(results))
    return list(zip(values, results))
