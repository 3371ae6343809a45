"""Matplotlib figure rendering for sweep reports and rail traversals.

All renderers write PNG files (Agg backend) and return the output path;
matplotlib is imported lazily so the numeric pipeline stays import-light.
"""

from __future__ import annotations

import math

import numpy as np

from .experiment import PAIRS, SINGLES_INPUTS, theta_prime
from .polarization import RAIL_INPUTS, RAIL_PRESETS, trace_path

__all__ = ["plot_fringes", "plot_singles", "plot_rail_paths"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_fringes(records, fits, path) -> str:
    """One panel per detector pair: counts vs theta' with the fitted fringe."""
    plt = _pyplot()
    theta = np.array([theta_prime(rec.alpha) for rec in records])
    fig, axes = plt.subplots(2, 3, figsize=(11, 6), sharex=True)
    for ax, pair in zip(axes.flat, PAIRS):
        counts = np.array([rec.pair_counts[pair] for rec in records])
        ax.plot(theta, counts, ".", ms=3, color="tab:blue")
        fit = fits.get(pair)
        if fit is not None:
            dense = np.linspace(theta.min(), theta.max(), 400)
            ax.plot(
                dense,
                fit.offset + fit.amplitude * np.cos(dense + fit.phase0),
                "-",
                lw=1,
                color="black",
            )
            ax.set_title(f"pair {pair[0]}{pair[1]}  V={fit.visibility:.3f}", fontsize=9)
        else:
            ax.set_title(f"pair {pair[0]}{pair[1]}", fontsize=9)
        ax.set_xlabel(r"$\theta'$ (rad)")
        ax.set_ylabel("coincidences")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def plot_singles(records, path) -> str:
    """Eight heralded one-photon traces with their mean lines."""
    plt = _pyplot()
    theta = np.array([theta_prime(rec.alpha) for rec in records])
    fig, axes = plt.subplots(4, len(SINGLES_INPUTS), figsize=(9, 8), sharex=True)
    axes = np.atleast_2d(axes)
    for col, inp in enumerate(SINGLES_INPUTS):
        for det in range(4):
            ax = axes[det, col]
            counts = np.array([rec.singles_counts[inp][det] for rec in records])
            ax.plot(theta, counts, ".", ms=3, color="tab:orange")
            ax.axhline(counts.mean(), color="black", lw=1)
            ax.set_ylabel(f"$D_{det}$")
            if det == 0:
                ax.set_title(f"input |{inp}>", fontsize=10)
            if det == 3:
                ax.set_xlabel(r"$\theta'$ (rad)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def plot_rail_paths(alpha: float, path, steps_per_plate: int = 128) -> str:
    """The three rail traversals on the Poincare sphere at one sweep angle."""
    plt = _pyplot()
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(111, projection="3d")
    u = np.linspace(0, 2 * math.pi, 40)
    v = np.linspace(0, math.pi, 20)
    ax.plot_wireframe(
        np.outer(np.cos(u), np.sin(v)),
        np.outer(np.sin(u), np.sin(v)),
        np.outer(np.ones_like(u), np.cos(v)),
        color="lightgray",
        lw=0.3,
    )
    colors = {"rail-top": "tab:red", "rail-middle": "tab:green", "rail-bottom": "tab:blue"}
    for name, program in RAIL_PRESETS.items():
        trace = trace_path(program, RAIL_INPUTS[name], alpha, steps_per_plate)
        pts = trace.points
        ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color=colors[name], lw=1.4, label=name)
        ax.scatter(*pts[0], color=colors[name], marker="o", s=25)
        ax.scatter(*pts[-1], color=colors[name], marker="^", s=25)
    for label, pt in (("H", (1, 0, 0)), ("V", (-1, 0, 0)), ("R", (0, 0, 1)), ("L", (0, 0, -1))):
        ax.text(*[1.12 * c for c in pt], label, fontsize=9)
    ax.legend(loc="upper left", fontsize=8)
    ax.set_box_aspect((1, 1, 1))
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)
