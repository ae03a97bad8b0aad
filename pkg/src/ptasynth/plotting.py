"""Raster figures of a cartography, drawn with matplotlib's Agg backend."""

from __future__ import annotations

from typing import Sequence

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import Polygon, Rectangle

from .cartography import Tiling
from .output import FILL, PlotViewport, tile_polygon


def cartography_figure(tiling: Tiling, viewport: PlotViewport, names: Sequence[str] | None = None) -> Figure:
    umin, umax, vmin, vmax = (float(b) for b in viewport.box())
    i, j = viewport.params
    names = list(names) if names is not None else [f"p{k + 1}" for k in range(len(tiling.v0))]
    fig = Figure(figsize=(5, 5), dpi=100)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    for n, tile in enumerate(tiling.tiles, start=1):
        poly = tile_polygon(tile.constraint, viewport)
        if len(poly) < 3:
            continue
        xy = [(float(u), float(v)) for u, v in poly]
        ax.add_patch(Polygon(xy, closed=True, facecolor=FILL[tile.verdict], edgecolor="#333333",
                             alpha=0.7, linewidth=0.8))
        cu = sum(p[0] for p in xy) / len(xy)
        cv = sum(p[1] for p in xy) / len(xy)
        ax.text(cu, cv, str(n), ha="center", va="center", fontsize=8)
    (lo_u, hi_u), (lo_v, hi_v) = tiling.v0.bounds[i], tiling.v0.bounds[j]
    ax.add_patch(Rectangle((float(lo_u), float(lo_v)), float(hi_u - lo_u), float(hi_v - lo_v),
                           fill=False, edgecolor="black", linestyle="--", linewidth=1.5))
    ax.set_xlim(umin, umax)
    ax.set_ylim(vmin, vmax)
    ax.set_xlabel(names[i])
    ax.set_ylabel(names[j])
    ax.set_aspect("auto")
    fig.tight_layout()
    return fig


def save_cartography_png(tiling: Tiling, viewport: PlotViewport, path, names: Sequence[str] | None = None):
    fig = cartography_figure(tiling, viewport, names)
    # no Software/creation metadata so identical inputs give identical bytes
    fig.savefig(path, format="png", metadata={"Software": None})
