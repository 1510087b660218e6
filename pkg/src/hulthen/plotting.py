"""Deterministic SVG line plots of scan curves; imaginary points become gaps."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import ScanCurve  # noqa: E402

AXIS_LABELS = {"alpha": r"$\alpha$", "dimension": "D"}
TITLES = {
    "fig1": "Klein-Gordon energy against alpha",
    "fig2": "Dirac energy against alpha",
    "fig3": "Klein-Gordon energy against D",
    "fig4": "Dirac energy against D",
}


def write_svg(curves: list[ScanCurve], path, title: str = "") -> None:
    with plt.rc_context({"svg.hashsalt": "hulthen", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for c in curves:
            ax.plot(c.x, c.energies, label=c.label, linewidth=1.2)
        axis = curves[0].axis if curves else "alpha"
        ax.set_xlabel(AXIS_LABELS[axis])
        if axis == "alpha":
            ax.set_xscale("log")
        ax.set_ylabel("E")
        if title:
            ax.set_title(title)
        ax.legend(fontsize="x-small", ncol=2)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
