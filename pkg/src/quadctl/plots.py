"""Report figures rendered from a trace with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sim import COL  # noqa: E402

ACTUAL = "tab:red"
REFERENCE = "tab:green"


def _pair_plot(trace: np.ndarray, names, units, title: str):
    t = trace[:, COL["t"]]
    fig, axes = plt.subplots(len(names), 1, sharex=True, figsize=(8, 2.0 * len(names)))
    for ax, name, unit in zip(axes, names, units):
        ax.plot(t, trace[:, COL[f"{name}_ref"]], color=REFERENCE, lw=1.2, label="reference")
        ax.plot(t, trace[:, COL[name]], color=ACTUAL, lw=0.9, label="actual")
        ax.set_ylabel(f"{name} [{unit}]")
        ax.grid(alpha=0.3)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[0].set_title(title)
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def pose_figure(trace: np.ndarray):
    return _pair_plot(trace, ("x", "y", "z"), ("m", "m", "m"), "Centre of mass")


def attitude_figure(trace: np.ndarray):
    return _pair_plot(trace, ("roll", "pitch", "yaw"), ("rad", "rad", "rad"), "Body attitude")


def velocity_figure(trace: np.ndarray):
    return _pair_plot(trace, ("v_fw", "v_lw", "yaw_rate"), ("m/s", "m/s", "rad/s"), "Body velocities")


def path_figure(trace: np.ndarray):
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(trace[:, COL["x_ref"]], trace[:, COL["y_ref"]], color=REFERENCE, lw=1.2, label="reference")
    ax.plot(trace[:, COL["x"]], trace[:, COL["y"]], color=ACTUAL, lw=0.9, label="actual")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title("Ground track")
    fig.tight_layout()
    return fig


def gait_figure(trace: np.ndarray):
    t = trace[:, COL["t"]]
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 6))
    for i in range(4):
        on = trace[:, COL[f"sigma{i + 1}"]] > 0
        axes[0].fill_between(t, i + 0.1, i + 0.9, where=on, step="post", color="tab:blue", lw=0)
    axes[0].set_yticks([0.5, 1.5, 2.5, 3.5], ["FL", "FR", "RL", "RR"])
    axes[0].set_ylabel("contact")
    axes[1].step(t, trace[:, COL["n_feet"]], where="post", color="k", lw=0.9)
    axes[1].set_ylabel("N")
    axes[1].set_ylim(-0.2, 4.2)
    axes[2].plot(t, trace[:, COL["period"]], label="T [s]")
    axes[2].plot(t, trace[:, COL["duty"]], label="duty")
    axes[2].legend(loc="upper right", fontsize=8)
    axes[2].set_xlabel("t [s]")
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def timing_figure(trace: np.ndarray):
    n = trace[:, COL["n_feet"]].astype(int)
    ns = trace[:, COL["compute_ns"]]
    fig, ax = plt.subplots(figsize=(7, 4))
    if np.any(ns > 0):
        for k in sorted(set(n.tolist())):
            ax.hist(ns[n == k] / 1e3, bins=40, alpha=0.6, label=f"N = {k}")
        ax.set_xlabel("compute time per tick [us]")
        ax.set_ylabel("ticks")
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "run with --timing to record compute times", ha="center", va="center",
                transform=ax.transAxes)
        ax.set_axis_off()
    ax.set_title("Per-tick compute time by grounded feet")
    fig.tight_layout()
    return fig


FIGURES = {
    "pose": pose_figure,
    "attitude": attitude_figure,
    "velocity": velocity_figure,
    "path": path_figure,
    "gait": gait_figure,
    "timing": timing_figure,
}


def render_report(trace: np.ndarray, csv_path, dpi: int = 120) -> list[Path]:
    """Write one PNG per figure next to ``csv_path`` as ``<stem>_<name>.png``."""
    csv_path = Path(csv_path)
    out = []
    for name, build in FIGURES.items():
        fig = build(trace)
        path = csv_path.with_name(f"{csv_path.stem}_{name}.png")
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        out.append(path)
    return out
