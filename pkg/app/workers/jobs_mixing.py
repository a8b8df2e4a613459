"""
kNN graph, assortativity and similarity stages.
"""

import logging
from pathlib import Path

from app.core.errors import StaleArtifactError
from app.models.analysis import KnnGraph
from app.models.pipeline import PipelineConfig
from app.models.skyculture import Predictor
from app.services import artifacts
from app.services.mixing import (
    assortativity,
    default_p,
    knn_graph,
    one_vs_others_all,
    similarity_graph,
    similarity_matrix,
)
from app.services.plots.dot import similarity_dot
from app.services.skyculture import predictor_labels

logger = logging.getLogger("skysig.jobs")


def run_knn(config: PipelineConfig) -> dict:
    out_dir = Path(config.output_dir)
    matrix, _ = artifacts.load_features(out_dir)
    n_cultures = len(set(matrix.culture_ids))
    p = default_p(matrix.n, n_cultures) if config.knn_p == "auto" else int(config.knn_p)

    graph = knn_graph(matrix, p)
    output = artifacts.save_knn(out_dir, graph)
    report = {"nodes": graph.n, "p": p, "cultures": n_cultures}
    artifacts.write_manifest(
        out_dir,
        artifacts.KNN,
        [output],
        params={"p": p},
        inputs={"features": artifacts.manifest_digest(out_dir, artifacts.FEATURES)},
        report=report,
    )
    logger.info("[KNN] %d nodes, outdegree %d", graph.n, p)
    return report


def _graph_and_labels(config: PipelineConfig, predictor: Predictor) -> tuple[KnnGraph, dict[str, str]]:
    out_dir = Path(config.output_dir)
    dataset = artifacts.load_dataset_artifact(out_dir)
    graph = artifacts.load_knn(out_dir)
    if set(graph.nodes) != set(dataset.figure_keys):
        raise StaleArtifactError("kNN graph and dataset cover different figures; rerun features and knn", str(out_dir))
    labels = predictor_labels(dataset, predictor, config.merge_greek_ancestry)
    return graph, labels


def _upstream(out_dir: Path) -> dict[str, str]:
    return {
        "dataset": artifacts.manifest_digest(out_dir, artifacts.DATASET),
        "knn": artifacts.manifest_digest(out_dir, artifacts.KNN),
    }


def run_assort(config: PipelineConfig, predictor: Predictor) -> dict:
    """Global assortativity of ``predictor`` plus every class against the rest."""
    out_dir = Path(config.output_dir)
    graph, labels = _graph_and_labels(config, predictor)

    result = assortativity(graph, labels)
    rows = [(predictor.value, "ALL", result.r, result.sigma_r, result.r_raw, result.r_max)]
    for label, focus in one_vs_others_all(graph, labels, skip_failures=True).items():
        rows.append((predictor.value, label, focus.r, focus.sigma_r, focus.r_raw, focus.r_max))

    name = artifacts.assortativity_name(predictor.value)
    output = artifacts.write_csv(
        out_dir / f"{name}.csv", ("predictor", "scope", "r", "sigma_r", "r_raw", "r_max"), rows
    )
    report = {"r": result.r, "sigma_r": result.sigma_r, "r_raw": result.r_raw, "r_max": result.r_max}
    artifacts.write_manifest(
        out_dir,
        name,
        [output],
        params={"predictor": predictor.value, "merge_greek_ancestry": config.merge_greek_ancestry},
        inputs=_upstream(out_dir),
        report=report,
    )
    logger.info("[ASSORT] %s: r=%.4f +/- %.4f (raw %.4f, max %.4f)", predictor.value, result.r, result.sigma_r, result.r_raw, result.r_max)
    return report


def run_similarity(config: PipelineConfig, predictor: Predictor) -> dict:
    """Pairwise similarity between the classes of ``predictor`` and the thresholded graph."""
    out_dir = Path(config.output_dir)
    graph, labels = _graph_and_labels(config, predictor)
    normalized = not config.similarity_raw

    classes, delta = similarity_matrix(graph, labels, normalized)
    sim = similarity_graph(graph, labels, config.similarity_threshold, normalized, matrix=(classes, delta))

    name = artifacts.similarity_name(predictor.value)
    rows = [
        (classes[i], classes[j], delta[i, j])
        for i in range(len(classes))
        for j in range(i + 1, len(classes))
    ]
    outputs = [
        artifacts.write_csv(out_dir / f"{name}.csv", ("class_a", "class_b", "delta"), rows),
        artifacts.atomic_write_text(out_dir / f"{name}.dot", similarity_dot(sim, name)),
    ]
    report = {
        "threshold": sim.graph["threshold"],
        "classes": len(classes),
        "edges": sim.number_of_edges(),
        "sizes": {node: sim.nodes[node]["size"] for node in sorted(sim.nodes)},
    }
    artifacts.write_manifest(
        out_dir,
        name,
        outputs,
        params={
            "predictor": predictor.value,
            "normalized": normalized,
            "threshold": config.similarity_threshold,
            "merge_greek_ancestry": config.merge_greek_ancestry,
        },
        inputs=_upstream(out_dir),
        report=report,
    )
    logger.info("[SIMILARITY] %s: %d classes, %d links above %.4f", predictor.value, len(classes), report["edges"], report["threshold"])
    return report
