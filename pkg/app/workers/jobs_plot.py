"""Plot stage: SVG figures rendered from the artifacts of earlier stages."""

import logging
import re
from pathlib import Path
from typing import Optional

import networkx as nx

from app.core.errors import DataValidationError
from app.models.pipeline import PipelineConfig
from app.models.signature import FEATURE_CODES, feature_index
from app.models.skyculture import Predictor
from app.services import artifacts
from app.services.plots import (
    PLOT_KINDS,
    diversity_svg,
    embedding_svg,
    miniature_svg,
    overlay_svg,
    similarity_svg,
)
from app.services.regions import cluster_distribution, root_star_regions
from app.services.skyculture import predictor_labels

logger = logging.getLogger("skysig.jobs")


def _slug(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "_", value).strip("_") or "x"


def _require(value: Optional[str], flag: str, kind: str) -> str:
    if not value:
        raise DataValidationError(f"plot kind '{kind}' needs {flag}")
    return value


def _plot_embedding(out_dir: Path, feature: Optional[str]) -> tuple[str, str]:
    keys, coords, _ = artifacts.load_embedding(out_dir)
    if feature is None:
        return "plot_embedding.svg", embedding_svg(keys, coords)
    try:
        column = feature_index(feature)
    except KeyError:
        raise DataValidationError(f"unknown feature {feature!r}") from None
    matrix, _ = artifacts.load_features(out_dir)
    values = matrix.raw[[matrix.row(key) for key in keys], column]
    code = FEATURE_CODES[column]
    return f"plot_embedding_{code}.svg", embedding_svg(keys, coords, values, code)


def _plot_overlay(out_dir: Path, config: PipelineConfig, predictor: Predictor, focus: str) -> tuple[str, str]:
    keys, coords, _ = artifacts.load_embedding(out_dir)
    dataset = artifacts.load_dataset_artifact(out_dir)
    labels = predictor_labels(dataset, predictor, config.merge_greek_ancestry)
    svg = overlay_svg(keys, coords, labels, focus)
    return f"plot_overlay_{predictor.value}_{_slug(focus)}.svg", svg


def _plot_similarity(out_dir: Path, config: PipelineConfig, predictor: Predictor) -> tuple[str, str]:
    name = artifacts.similarity_name(predictor.value)
    manifest = artifacts.verify_manifest(out_dir, name)
    report = manifest["report"]
    graph = nx.Graph()
    for node, size in sorted(report["sizes"].items()):
        graph.add_node(node, size=size)
    for row in artifacts.read_csv(out_dir / f"{name}.csv"):
        delta = float(row["delta"])
        if delta > float(report["threshold"]):
            graph.add_edge(row["class_a"], row["class_b"], weight=delta)
    return f"plot_similarity_{predictor.value}.svg", similarity_svg(graph, config.seed)


def _plot_diversity(out_dir: Path) -> tuple[str, str]:
    assignment = artifacts.load_clusters(out_dir)
    manifest = artifacts.verify_manifest(out_dir, artifacts.DIVERSITY)
    dataset = artifacts.load_dataset_artifact(out_dir)
    regions = root_star_regions(dataset, int(manifest["params"]["region_min_count"]))
    scores = {row["root_star"]: float(row["H"]) for row in artifacts.read_csv(out_dir / artifacts.DIVERSITY_CSV)}
    distributions = {r.root_star: cluster_distribution(r, assignment.labels) for r in regions}
    svg = diversity_svg(regions, scores, distributions, manifest["params"]["clusters"])
    return "plot_diversity.svg", svg


def _plot_miniature(out_dir: Path, figure: str) -> tuple[str, str]:
    dataset = artifacts.load_dataset_artifact(out_dir)
    try:
        fig = dataset.figure(figure)
    except KeyError:
        raise DataValidationError(f"unknown figure {figure!r} (expected culture/figure)") from None
    return f"plot_miniature_{_slug(fig.culture_id)}_{_slug(fig.figure_id)}.svg", miniature_svg(fig, dataset.catalog)


def run_plot(
    config: PipelineConfig,
    kind: str,
    feature: Optional[str] = None,
    predictor: Optional[Predictor] = None,
    focus: Optional[str] = None,
    figure: Optional[str] = None,
) -> Path:
    """Render one plot kind into the output directory and return its path."""
    out_dir = Path(config.output_dir)
    if kind == "embedding":
        filename, svg = _plot_embedding(out_dir, feature)
    elif kind == "overlay":
        if predictor is None:
            raise DataValidationError("plot kind 'overlay' needs --predictor")
        filename, svg = _plot_overlay(out_dir, config, predictor, _require(focus, "--focus", kind))
    elif kind == "similarity":
        if predictor is None:
            raise DataValidationError("plot kind 'similarity' needs --predictor")
        filename, svg = _plot_similarity(out_dir, config, predictor)
    elif kind == "diversity":
        filename, svg = _plot_diversity(out_dir)
    elif kind == "miniature":
        filename, svg = _plot_miniature(out_dir, _require(figure, "--figure", kind))
    else:
        raise DataValidationError(f"unknown plot kind {kind!r} (expected one of {', '.join(PLOT_KINDS)})")

    path = artifacts.atomic_write_text(out_dir / filename, svg)
    logger.info("[PLOT] %s written to %s", kind, path)
    return path
