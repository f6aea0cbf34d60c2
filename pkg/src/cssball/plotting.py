"""Figure renderers for the command-line report paths.

Everything draws through the Agg backend, so no display is needed, and
SVG output pins the id hash salt and drops the date stamp so identical
runs produce identical files next to the delimited data.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")  # must precede pyplot
matplotlib.rcParams["svg.hashsalt"] = "cssball"

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: str) -> None:
    kwargs = {"metadata": {"Date": None}} if str(path).endswith(".svg") else {}
    try:
        fig.savefig(path, bbox_inches="tight", **kwargs)
    finally:
        plt.close(fig)


def threshold_curves(rows, path: str) -> None:
    """Existence and sign-change thresholds against the exponent."""
    p = [row["p"] for row in rows]
    omega0 = [row["omega0"] for row in rows]
    omega1 = [row["omega1"] for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(p, omega1, color="tab:blue", label="existence threshold")
    ax.plot(p, omega0, color="tab:red", label="energy sign change")
    ax.set_xlabel("exponent p")
    ax.set_ylabel("frequency")
    ax.grid(alpha=0.3)
    ax.legend()
    _save(fig, path)


def scan_curves(scan, path: str) -> None:
    """Scanned ansatz energy against the two-term model over the window."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(scan.rho, scan.phi, color="tab:blue", label="ansatz energy")
    ax.plot(scan.rho, scan.model, color="tab:orange", linestyle="--",
            label="two-term model")
    ax.axvline(scan.rho_star, color="tab:green", linewidth=0.8,
               label=f"minimum at rho={scan.rho_star:.3f}")
    ax.set_xlabel("centre rho")
    ax.set_ylabel("energy")
    ax.grid(alpha=0.3)
    ax.legend()
    _save(fig, path)


def solution_profile(report, path: str) -> None:
    """Converged profile with its accumulated charge and coupling tail."""
    grid = report.field.grid
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(6.0, 5.5), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]})
    top.plot(grid.r, report.field.u, color="tab:blue", label="profile u")
    top.axvline(report.rho_fit, color="tab:green", linewidth=0.8,
                label=f"peak at r={report.rho_fit:.3f}")
    top.set_ylabel("u")
    top.grid(alpha=0.3)
    top.legend()
    bottom.plot(grid.r, report.field.H, color="tab:red", label="charge H")
    bottom.plot(grid.r, report.field.Tail, color="tab:purple", label="tail coupling")
    bottom.set_xlabel("radius r")
    bottom.grid(alpha=0.3)
    bottom.legend()
    _save(fig, path)
