"""Static SVG figures for experiment results.

One figure per experiment with four stacked panels (speed, input, barrier
value, decay variable) and one line per run.  The SVG writer is pinned to a
fixed hash salt and no timestamp so reruns produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {"svg.hashsalt": "odcbf", "svg.fonttype": "path", "font.size": 8}
_LINES = ("-", "--", "-.", ":")


def _panels(ax, result):
    labels = [c.label for c in result.experiment.controllers]
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    by_state = len(result.experiment.initial_states) > 1
    for r in result.runs:
        tr = r.trace
        k = labels.index(r.label)
        # several initial states: colour per state, dash per controller
        style = _LINES[k % len(_LINES)] if by_state else "-"
        color = colors[(r.index if by_state else k) % len(colors)]
        name = f"{r.label}, x2(0)={r.x0[1]:g}"
        ax[0].plot(tr.times, tr.states[:, 1], style, color=color, lw=1, label=name)
        ax[1].plot(tr.times, tr.inputs[:, 0], style, color=color, lw=1)
        h = np.where(tr.h_values > 0, tr.h_values, np.nan) if ax[2].get_yscale() == "log" else tr.h_values
        ax[2].plot(tr.times, h, style, color=color, lw=1)
        if not np.all(np.isnan(tr.omega_values)):
            ax[3].plot(tr.times, tr.omega_values, style, color=color, lw=1)


def plot_experiment(result, out_dir: Path, log_h: bool = False) -> list[Path]:
    """Write ``<name>.svg`` into ``out_dir`` and return its path."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(4, 1, figsize=(6.0, 8.0), sharex=True)
        if log_h:
            ax[2].set_yscale("log")
        _panels(ax, result)
        for a, name in zip(ax, ("x2 [m/s]", "u [N]", "h [m]", "omega")):
            a.set_ylabel(name)
            a.grid(True, lw=0.3)
        ax[2].axhline(0.0, color="k", lw=0.5)
        lo, hi = ax[3].get_ylim()
        if hi - lo > 10.0:
            ax[3].set_yscale("symlog", linthresh=1.0)
        ax[3].set_xlabel("t [s]")
        ax[0].legend(fontsize=6, ncol=2)
        ax[0].set_title(result.experiment.name)
        fig.tight_layout()
        path = Path(out_dir) / f"{result.experiment.name}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return [path]
