"""Figures rendered alongside the delimited outputs of a run."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_mode_amplitudes(out_dir, times, amplitudes):
    """Amplitude history |a(t)| for every tracked surface mode.

    amplitudes maps (ell, m) to the complex displacement history. Returns
    the figure path, or None when there is nothing to draw.
    """
    if not amplitudes:
        return None
    fig, ax = plt.subplots(figsize=(8, 5))
    for ell, m in sorted(amplitudes):
        a = np.asarray(amplitudes[(ell, m)])
        ax.plot(times, np.abs(a), label=f"l={ell}, m={m}")
    ax.set_xlabel("t")
    ax.set_ylabel("|a|")
    ax.set_title("Surface mode amplitudes")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    path = os.path.join(out_dir, "mode_amplitudes.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_monopole(out_dir, rows):
    """Interface and gas panels for the monopole history rows."""
    if not rows:
        return None
    data = np.asarray(rows, dtype=float)
    t = data[:, 0]
    fig, axes = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    axes[0].plot(t, data[:, 1], label="a")
    axes[0].plot(t, data[:, 2], label="a_dot")
    axes[0].set_ylabel("interface")
    axes[0].grid(True, alpha=0.3)
    axes[0].legend(loc="best", fontsize=9)
    axes[1].plot(t, data[:, 4], label="gas pressure", color="tab:red")
    axes[1].plot(t, data[:, 6], label="interior norm", color="tab:green")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("gas")
    axes[1].grid(True, alpha=0.3)
    axes[1].legend(loc="best", fontsize=9)
    fig.tight_layout()
    path = os.path.join(out_dir, "monopole.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_run_figures(out_dir, times, amplitudes, monopole_rows):
    """Render the standard figures for one run; returns the saved paths."""
    paths = []
    for path in (
        plot_mode_amplitudes(out_dir, times, amplitudes),
        plot_monopole(out_dir, monopole_rows),
    ):
        if path is not None:
            paths.append(path)
    return paths
