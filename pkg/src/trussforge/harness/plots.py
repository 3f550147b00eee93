"""Static plots of a run: 3D path, per-axis tracking and member forces."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _col(trace, name):
    return trace.rows[:, trace.columns.index(name)]


def plot_path(trace, path) -> Path:
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot(*(_col(trace, f"ref_des_{a}_m") for a in "xyz"), "--", label="desired")
    ax.plot(*(_col(trace, f"ref_act_{a}_m") for a in "xyz"), label="actual")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("z [m]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def plot_tracking(trace, path) -> Path:
    t = _col(trace, "time_s")
    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
    for ax, a in zip(axes, "xyz"):
        ax.plot(t, _col(trace, f"ref_des_{a}_m"), "--", label="desired")
        ax.plot(t, _col(trace, f"ref_act_{a}_m"), label="actual")
        ax.set_ylabel(f"{a} [m]")
    axes[0].legend()
    axes[-1].set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def plot_member_forces(trace, path) -> Path:
    t = _col(trace, "time_s")
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in trace.columns:
        if name.startswith("member") and name.endswith("_force_N"):
            ax.plot(t, _col(trace, name), lw=0.8, label=name.split("_")[0])
    ax.set_xlabel("time [s]")
    ax.set_ylabel("internal force [N] (tension +)")
    if len(ax.lines) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def write_plots(trace, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [plot_path(trace, out / "path_3d.png"), plot_tracking(trace, out / "tracking.png"),
            plot_member_forces(trace, out / "member_forces.png")]
