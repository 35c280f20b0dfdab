"""Figure rendering for run reports.

Renders the final density profile and the diagnostics time series to PNG
files next to the delimited output.  Uses the non-interactive backend so
the CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_run_figures"]


def render_run_figures(grid, records, state, prefix: str) -> list:
    """Write <prefix>_density.png and <prefix>_diagnostics.png."""
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(grid.r_centers, state.n, lw=1.5)
    ax.set_xlabel("r")
    ax.set_ylabel("n(r)")
    ax.set_title(f"density at t = {state.t:.6g}")
    fig.tight_layout()
    path = f"{prefix}_density.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    t = [rec.t for rec in records]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    panels = [
        ("E", "E_asymptotic", "energy"),
        ("W", None, "neg-entropy W"),
        ("theta", None, "temperature"),
        ("n_max", None, "max density"),
    ]
    for ax, (a, b, title) in zip(axes.flat, panels):
        ax.plot(t, [getattr(rec, a) for rec in records], lw=1.2, label=a)
        if b:
            ax.plot(t, [getattr(rec, b) for rec in records], lw=1.2, label=b)
            ax.legend(fontsize=8)
        ax.set_title(title, fontsize=10)
    for ax in axes[-1]:
        ax.set_xlabel("t")
    fig.tight_layout()
    path = f"{prefix}_diagnostics.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
