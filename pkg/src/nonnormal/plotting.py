"""Static scatter plots of eigenvalue series."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["SERIES_STYLE", "scatter_svg"]

# perturbed: blue crosses, circulant: black circles, scaled circulant: red squares
SERIES_STYLE = {
    "perturbed": dict(marker="x", color="tab:blue", s=14, linewidths=0.8),
    "circulant": dict(marker="o", facecolors="none", edgecolors="black", s=18, linewidths=0.6),
    "scaled-circulant": dict(marker="s", facecolors="none", edgecolors="red", s=18, linewidths=0.6),
}


def scatter_svg(series: Mapping[str, np.ndarray], path: str | Path, title: str = "") -> Path:
    """Write an SVG overlaying each series; output is byte-stable for identical input."""
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "nonnormal", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        for name, pts in series.items():
            pts = np.asarray(pts, dtype=np.complex128)
            ax.scatter(pts.real, pts.imag, label=name, **SERIES_STYLE.get(name, {}))
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", fontsize="small")
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
