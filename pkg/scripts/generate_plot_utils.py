#!/usr/bin/env python3
"""
Localization Plot Utilities

Renders true locations (circles), computed locations (stars), the segment
joining each pair and the anchors (squares) to a standalone SVG. Output is
byte-stable for fixed inputs.
"""

import io
import logging
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

SVG_STYLE = {
    "svg.hashsalt": "canonical-snl",
    "svg.fonttype": "none",
    "path.simplify": False,
}


@dataclass(frozen=True)
class PlotSpec:
    """Canvas and glyph options of a localization plot."""

    width: float = 6.0
    height: float = 6.0
    axis_range: Optional[Tuple[float, float, float, float]] = None
    show_edges: bool = False
    title: Optional[str] = None


def connector_lengths(truth: np.ndarray, computed: np.ndarray) -> np.ndarray:
    """Length of the segment joining each true and computed location."""
    return np.linalg.norm(np.asarray(computed, dtype=float) - np.asarray(truth, dtype=float), axis=1)


def _axis_range(points: Sequence[np.ndarray]) -> Tuple[float, float, float, float]:
    present = [np.asarray(p, dtype=float) for p in points if p is not None and len(p)]
    if not present:
        return -1.0, 1.0, -1.0, 1.0
    stacked = np.vstack(present)
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    pad = 0.05 * max(float(np.max(hi - lo)), 1e-9)
    return float(lo[0] - pad), float(hi[0] + pad), float(lo[1] - pad), float(hi[1] + pad)


def render_localization_svg(
    anchors: np.ndarray,
    computed: Optional[np.ndarray] = None,
    truth: Optional[np.ndarray] = None,
    edges: Optional[Sequence[Tuple[np.ndarray, np.ndarray]]] = None,
    spec: Optional[PlotSpec] = None,
) -> str:
    """
    Render a localization plot to SVG text.

    Every glyph carries an SVG id: ``true-i``, ``computed-i``, ``connector-i``
    (1-based sensors), ``anchor-k`` and ``edge-e``.

    Args:
        anchors: anchor coordinates, shape (m, 2)
        computed: computed sensor locations, shape (n, 2)
        truth: true sensor locations, shape (n, 2); connectors need both
        edges: measured pairs as (start, end) points, drawn when spec.show_edges
        spec: canvas options

    Returns:
        SVG document as a string

    Raises:
        ValueError: If the points are not two-dimensional or the sizes disagree
    """
    spec = spec or PlotSpec()
    anchors = np.asarray(anchors, dtype=float).reshape(-1, 2)
    for name, points in (("computed", computed), ("truth", truth)):
        if points is not None and np.asarray(points).shape[-1] != 2:
            raise ValueError(f"{name} locations must be two-dimensional")
    if computed is not None and truth is not None and len(computed) != len(truth):
        raise ValueError(f"computed has {len(computed)} sensors, truth has {len(truth)}")

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(spec.width, spec.height))
        try:
            if spec.show_edges and edges:
                for e, (start, end) in enumerate(edges, 1):
                    (line,) = ax.plot([start[0], end[0]], [start[1], end[1]], color="0.85", linewidth=0.5, zorder=1)
                    line.set_gid(f"edge-{e}")

            if truth is not None and computed is not None:
                for i, (t, c) in enumerate(zip(truth, computed), 1):
                    (line,) = ax.plot([t[0], c[0]], [t[1], c[1]], color="black", linewidth=1.0, zorder=2)
                    line.set_gid(f"connector-{i}")

            if truth is not None:
                for i, t in enumerate(truth, 1):
                    (marker,) = ax.plot([t[0]], [t[1]], marker="o", markersize=6, markerfacecolor="none",
                                        markeredgecolor="tab:blue", linestyle="none", zorder=3)
                    marker.set_gid(f"true-{i}")

            if computed is not None:
                for i, c in enumerate(computed, 1):
                    (marker,) = ax.plot([c[0]], [c[1]], marker="*", markersize=8, color="tab:red",
                                        linestyle="none", zorder=4)
                    marker.set_gid(f"computed-{i}")

            for k, a in enumerate(anchors, 1):
                (marker,) = ax.plot([a[0]], [a[1]], marker="s", markersize=7, color="black",
                                    linestyle="none", zorder=5)
                marker.set_gid(f"anchor-{k}")

            x0, x1, y0, y1 = spec.axis_range or _axis_range([anchors, computed, truth])
            ax.set_xlim(x0, x1)
            ax.set_ylim(y0, y1)
            ax.set_aspect("equal", adjustable="box")
            if spec.title:
                ax.set_title(spec.title)

            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buffer.getvalue()


def write_localization_svg(output_path: str, svg: str) -> str:
    """Write SVG text to output_path, creating its directory."""
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write(svg)
    logger.info("wrote plot %s", output_path)
    return output_path
