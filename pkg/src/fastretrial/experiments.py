"""Figure presets: queue length vs rate and vs device count at a fixed pool,
the adaptive controller trajectory, and adaptive pool size vs device count."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from fastretrial.config import ScenarioConfig
from fastretrial.engine import RunMetrics, run, sweep
from fastretrial.report import write_table
from fastretrial.stability import full_load_success_prob, min_stable_l1, optimal_l1

PRESETS = ("fig3a", "fig3b", "fig4", "fig5")

FIG3A_LAMBDAS = tuple(round(0.05 + 0.025 * i, 3) for i in range(9))
FIG3B_N1 = tuple(range(5, 41, 5))
FIG5_N1 = tuple(range(10, 31, 5))


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]]
    header: dict[str, Any]

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def _rep_sweep(base: ScenarioConfig, parameter: str, values, reps: int, workers: int) -> list[list[RunMetrics]]:
    """runs[i][r]: value i, replication r (base seed shifted by r)."""
    per_rep = [
        [m for _, m in sweep(base.with_param("seed", (base.seed + r) % 2**64), parameter, values, workers)]
        for r in range(reps)
    ]
    return [list(col) for col in zip(*per_rep)] if values else []


def _fixed_pool_rows(runs: list[list[RunMetrics]], xs, n1_of, l1: int):
    rows = []
    for x, group in zip(xs, runs):
        rows.append(
            (
                x,
                float(np.mean([m.time_avg_queue for m in group])),
                max(m.max_queue for m in group),
                float(np.mean([m.mean_delay for m in group])),
                sum(bool(m.unstable) for m in group),
                full_load_success_prob(n1_of(x), l1),
            )
        )
    return rows


def fig3a(seed: int = 1, horizon: int = 200_000, reps: int = 3, workers: int = 1) -> Table:
    base = ScenarioConfig(n1=30, lam=0.2, l1=20, l_total=50, horizon=horizon, seed=seed)
    runs = _rep_sweep(base, "lambda", FIG3A_LAMBDAS, reps, workers)
    rows = _fixed_pool_rows(runs, FIG3A_LAMBDAS, lambda x: 30, 20)
    return Table(
        "fig3a",
        ("lambda", "mean_queue", "max_queue", "mean_delay", "unstable_runs", "full_load_success"),
        rows,
        {"preset": "fig3a", "seed": seed, "n1": 30, "l1": 20, "horizon": horizon, "reps": reps},
    )


def fig3b(seed: int = 1, horizon: int = 200_000, reps: int = 3, workers: int = 1) -> Table:
    base = ScenarioConfig(n1=30, lam=0.2, l1=20, l_total=50, horizon=horizon, seed=seed)
    runs = _rep_sweep(base, "n1", FIG3B_N1, reps, workers)
    rows = _fixed_pool_rows(runs, FIG3B_N1, lambda x: x, 20)
    return Table(
        "fig3b",
        ("n1", "mean_queue", "max_queue", "mean_delay", "unstable_runs", "full_load_success"),
        rows,
        {"preset": "fig3b", "seed": seed, "lambda": 0.2, "l1": 20, "horizon": horizon, "reps": reps},
    )


def fig4(seed: int = 1, horizon: int = 100_000, reps: int = 1, workers: int = 1) -> Table:
    cfg = ScenarioConfig(n1=30, lam=0.2, l1=None, l_total=50, mu=0.01 / 30, horizon=horizon, seed=seed)
    m = run(cfg)
    rows = list(zip(range(horizon), m.max_queue_by_slot.tolist(), m.l1_by_slot.tolist()))
    return Table(
        "fig4",
        ("slot", "max_queue", "l1"),
        rows,
        {
            "preset": "fig4",
            "seed": seed,
            "lambda": 0.2,
            "n1": 30,
            "l_total": 50,
            "mu": cfg.effective_mu,
            "horizon": horizon,
            "warmup": cfg.effective_warmup,
        },
    )


def fig5(seed: int = 1, horizon: int = 100_000, reps: int = 1, workers: int = 1) -> Table:
    base = ScenarioConfig(n1=10, lam=0.2, l1=None, l_total=50, horizon=horizon, seed=seed)
    runs = _rep_sweep(base, "n1", FIG5_N1, reps, workers)
    rows = []
    for n1, group in zip(FIG5_N1, runs):
        rows.append(
            (
                n1,
                float(np.mean([m.time_avg_l1 for m in group])),
                min_stable_l1(0.2, n1),
                optimal_l1(0.2 * n1, n1),
                float(np.mean([m.time_avg_queue for m in group])),
                max(m.max_queue for m in group),
            )
        )
    return Table(
        "fig5",
        ("n1", "avg_l1", "min_stable_l1", "l1_star", "mean_queue", "max_queue"),
        rows,
        {"preset": "fig5", "seed": seed, "lambda": 0.2, "l_total": 50, "mu": "0.01/n1", "horizon": horizon, "reps": reps},
    )


RUNNERS: dict[str, Callable[..., Table]] = {"fig3a": fig3a, "fig3b": fig3b, "fig4": fig4, "fig5": fig5}


def run_preset(name: str, seed: int = 1, horizon: int | None = None, workers: int = 1) -> Table:
    if name not in RUNNERS:
        raise KeyError(name)
    kwargs: dict[str, Any] = {"seed": seed, "workers": workers}
    if horizon is not None:
        kwargs["horizon"] = horizon
    return RUNNERS[name](**kwargs)


def write_preset(table: Table, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"{table.name}.csv"
    write_table(path, table.columns, table.rows, table.header)
    return path
