"""Optional SVG rendering of curve sets next to the CSV output.

CSV is the authoritative artifact; these plots are plain line charts with no
styling contract.  matplotlib is imported lazily so CSV-only runs never touch
it.  The hash salt and suppressed date metadata keep the SVG bytes identical
across reruns.
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["render_curves"]


def render_curves(path: str, curves: Sequence[tuple[str, "object", "object"]],
                  x_label: str, y_label: str, title: str | None = None) -> None:
    """Render labelled (x, y) curves to a single SVG file."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "levyexit"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, xs, ys in curves:
        ax.plot(xs, ys, linewidth=1.3, label=label)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(frameon=False, fontsize=9)
    ax.grid(alpha=0.25, linewidth=0.5)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
