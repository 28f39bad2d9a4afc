"""Render experiment tables to image files next to their CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from fastretrial.experiments import Table  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "figure.figsize": (4.5, 3.2),
    "savefig.dpi": 150,
}


def _fixed_pool(table: Table, xcol: str, xlabel: str):
    fig, ax = plt.subplots()
    ax.semilogy(table.column(xcol), table.column("mean_queue"), "o-", label="mean queue")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"average queue length $E[q_n]$")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return fig


def _trajectory(table: Table):
    fig, ax = plt.subplots()
    ax.plot(table.column("slot"), table.column("max_queue"), label=r"$\max_n q_n(t)$")
    ax.plot(table.column("slot"), table.column("l1"), label=r"$L_1(t)$")
    ax.set_xlabel("slot")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def _pool_vs_devices(table: Table):
    fig, ax = plt.subplots()
    n1 = table.column("n1")
    ax.plot(n1, table.column("avg_l1"), "o-", label="adaptive (time average)")
    ax.plot(n1, table.column("min_stable_l1"), "k--", label="minimum stable $L_1$")
    ax.set_xlabel("$N_1$")
    ax.set_ylabel("$L_1$")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def render(table: Table, out_dir: str | Path, fmt: str = "png") -> Path:
    path = Path(out_dir) / f"{table.name}.{fmt}"
    with plt.rc_context(STYLE):
        if table.name == "fig3a":
            fig = _fixed_pool(table, "lambda", r"$\lambda$")
        elif table.name == "fig3b":
            fig = _fixed_pool(table, "n1", "$N_1$")
        elif table.name == "fig4":
            fig = _trajectory(table)
        elif table.name == "fig5":
            fig = _pool_vs_devices(table)
        else:
            raise ValueError(f"no figure layout for {table.name!r}")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
