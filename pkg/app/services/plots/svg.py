"""
SVG emitters for the embedding scatter, class overlay, similarity graph,
region diversity chart and single-figure miniatures.
"""

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence

import networkx as nx
import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

from app.core.errors import DataValidationError
from app.models.analysis import SkyRegion
from app.models.catalog import StarCatalog
from app.models.skyculture import LineFigure
from app.services.plots.layout import force_layout
from app.services.star_catalog import positions

logger = logging.getLogger("skysig.plots")

TEMPLATES_DIR = Path(__file__).resolve().parents[3] / "templates" / "plots"

PLOT_KINDS = ("embedding", "overlay", "similarity", "diversity", "miniature")

WIDTH = 800
HEIGHT = 800
MARGIN = 40
BACKGROUND = "#d0d0d0"
FOCUS = "#d62728"

# Categorical palette for clusters
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
# Low-to-high gradient stops
GRADIENT = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    autoescape=select_autoescape(["j2"]),
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


def _render(template: str, **context) -> str:
    return _env.get_template(template).render(**context)


def _scale(coords: np.ndarray, width: int = WIDTH, height: int = HEIGHT) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    low = coords.min(axis=0)
    span = coords.max(axis=0) - low
    span[span == 0] = 1.0
    unit = (coords - low) / span
    out = np.empty_like(unit)
    out[:, 0] = MARGIN + unit[:, 0] * (width - 2 * MARGIN)
    out[:, 1] = height - MARGIN - unit[:, 1] * (height - 2 * MARGIN)
    return np.round(out, 2)


def gradient_color(value: float) -> str:
    """Colour for ``value`` in [0, 1] on a dark-blue-to-yellow ramp."""
    value = min(max(float(value), 0.0), 1.0) * (len(GRADIENT) - 1)
    i = min(int(value), len(GRADIENT) - 2)
    t = value - i
    rgb = [round(a + (b - a) * t) for a, b in zip(GRADIENT[i], GRADIENT[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def embedding_svg(
    keys: Sequence[str],
    coords: np.ndarray,
    values: Optional[np.ndarray] = None,
    feature: Optional[str] = None,
) -> str:
    """Scatter of the embedding, optionally coloured by one feature's gradient."""
    xy = _scale(coords)
    if values is not None:
        values = np.asarray(values, dtype=float)
        low, high = float(values.min()), float(values.max())
        norm = (values - low) / (high - low) if high > low else np.zeros_like(values)
        colors = [gradient_color(v) for v in norm]
        legend = {"feature": feature, "low": f"{low:.3g}", "high": f"{high:.3g}",
                  "low_color": gradient_color(0.0), "high_color": gradient_color(1.0)}
    else:
        colors = [PALETTE[0]] * len(keys)
        legend = None
    points = [{"key": k, "x": x, "y": y, "color": c} for k, (x, y), c in zip(keys, xy, colors)]
    title = f"Embedding coloured by {feature}" if feature else "Embedding"
    return _render("scatter.svg.j2", width=WIDTH, height=HEIGHT, title=title, points=points, legend=legend)


def overlay_svg(
    keys: Sequence[str],
    coords: np.ndarray,
    labels: Mapping[str, str],
    focus: str,
) -> str:
    """Embedding with one class drawn in the foreground over the rest."""
    if focus not in set(labels.values()):
        raise DataValidationError(f"focus label {focus!r} not present")
    xy = _scale(coords)
    background, foreground = [], []
    for key, (x, y) in zip(keys, xy):
        if labels[key] == focus:
            foreground.append({"key": key, "x": x, "y": y, "color": FOCUS})
        else:
            background.append({"key": key, "x": x, "y": y, "color": BACKGROUND})
    return _render(
        "scatter.svg.j2",
        width=WIDTH,
        height=HEIGHT,
        title=f"{focus} ({len(foreground)} of {len(keys)} figures)",
        points=background + foreground,
        legend=None,
    )


def similarity_svg(graph: nx.Graph, seed: int = 0) -> str:
    """Force-directed drawing of a similarity graph; isolated classes are still drawn."""
    pos = force_layout(graph, seed)
    nodes = sorted(graph.nodes)
    if nodes:
        xy = _scale(np.array([pos[n] for n in nodes]))
    else:
        xy = np.zeros((0, 2))
    place = {n: (x, y) for n, (x, y) in zip(nodes, xy)}
    max_size = max((graph.nodes[n].get("size", 1) for n in nodes), default=1) or 1
    weights = [d["weight"] for _, _, d in graph.edges(data=True)]
    max_weight = max(weights, default=1.0) or 1.0

    node_items = [
        {
            "name": n,
            "x": place[n][0],
            "y": place[n][1],
            "r": round(4 + 16 * np.sqrt(graph.nodes[n].get("size", 1) / max_size), 2),
        }
        for n in nodes
    ]
    edge_items = [
        {
            "x1": place[a][0], "y1": place[a][1], "x2": place[b][0], "y2": place[b][1],
            "width": round(0.5 + 5.5 * graph.edges[a, b]["weight"] / max_weight, 2),
            "weight": f"{graph.edges[a, b]['weight']:.3f}",
        }
        for a, b in sorted(tuple(sorted(e)) for e in graph.edges)
    ]
    return _render("similarity.svg.j2", width=WIDTH, height=HEIGHT, nodes=node_items, edges=edge_items)


def diversity_svg(
    regions: Sequence[SkyRegion],
    scores: Mapping[str, float],
    distributions: Mapping[str, Mapping[str, int]],
    clusters: Sequence[str],
) -> str:
    """One stacked bar per root star: member share per cluster, with H beside it."""
    bar_height = 14
    row_height = 20
    chart_width = 500
    left = 140
    colors = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(clusters)}
    rows = []
    for i, region in enumerate(regions):
        y = MARGIN + 30 + i * row_height
        x = left
        segments = []
        for cluster in clusters:
            count = distributions[region.root_star].get(cluster, 0)
            if not count:
                continue
            w = round(chart_width * count / region.member_count, 2)
            segments.append({"x": round(x, 2), "width": w, "color": colors[cluster], "cluster": cluster, "count": count})
            x += w
        rows.append(
            {
                "star": region.root_star,
                "members": region.member_count,
                "h": f"{scores[region.root_star]:.3f}",
                "y": y,
                "segments": segments,
            }
        )
    height = MARGIN * 2 + 30 + len(regions) * row_height + 30
    legend = [{"cluster": c, "color": colors[c], "x": left + i * 70} for i, c in enumerate(clusters)]
    return _render(
        "diversity.svg.j2",
        width=left + chart_width + 120,
        height=height,
        rows=rows,
        left=left,
        bar_height=bar_height,
        chart_width=chart_width,
        legend=legend,
        legend_y=height - MARGIN,
    )


def _gnomonic(vectors: np.ndarray) -> np.ndarray:
    center = vectors.mean(axis=0)
    center /= np.linalg.norm(center)
    pole = np.array([0.0, 0.0, 1.0]) if abs(center[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    east = np.cross(pole, center)
    east /= np.linalg.norm(east)
    north = np.cross(center, east)
    depth = vectors @ center
    if (depth <= 0.05).any():
        raise DataValidationError("figure is too wide for a gnomonic miniature")
    return np.degrees(np.column_stack((-(vectors @ east) / depth, (vectors @ north) / depth)))


def miniature_svg(figure: LineFigure, catalog: StarCatalog, px_per_degree: float = 10.0) -> str:
    """Line figure drawn to scale on a gnomonic projection; star size follows brightness."""
    stars = figure.stars
    pos = positions(catalog, stars)
    plane = _gnomonic(np.stack([pos[s] for s in stars]))
    plane -= plane.min(axis=0)
    extent = plane.max(axis=0)
    width = int(np.ceil(extent[0] * px_per_degree)) + 2 * MARGIN
    height = int(np.ceil(extent[1] * px_per_degree)) + 2 * MARGIN
    xy = {
        s: (round(MARGIN + p[0] * px_per_degree, 2), round(height - MARGIN - p[1] * px_per_degree, 2))
        for s, p in zip(stars, plane)
    }
    star_items = [
        {"id": s, "x": xy[s][0], "y": xy[s][1], "r": round(max(1.0, 5.0 - 0.6 * catalog.get(s).mag), 2)}
        for s in stars
    ]
    line_items = [{"x1": xy[a][0], "y1": xy[a][1], "x2": xy[b][0], "y2": xy[b][1]} for a, b in figure.edges]
    return _render(
        "miniature.svg.j2",
        width=width,
        height=height,
        title=figure.key,
        stars=star_items,
        lines=line_items,
    )
