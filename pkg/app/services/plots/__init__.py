from app.services.plots.dot import similarity_dot
from app.services.plots.layout import force_layout
from app.services.plots.svg import (
    PLOT_KINDS,
    diversity_svg,
    embedding_svg,
    miniature_svg,
    overlay_svg,
    similarity_svg,
)

__all__ = [
    "PLOT_KINDS",
    "diversity_svg",
    "embedding_svg",
    "force_layout",
    "miniature_svg",
    "overlay_svg",
    "similarity_dot",
    "similarity_svg",
]
