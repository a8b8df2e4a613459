"""Diversity stage: cluster every figure, build root-star regions, score them."""

import logging
from pathlib import Path

from app.models.analysis import ClusterSourceKind
from app.models.pipeline import PipelineConfig
from app.services import artifacts
from app.services.clusters import RULE_CLUSTERS, get_cluster_source
from app.services.regions import diversity, region_summary, root_star_regions

logger = logging.getLogger("skysig.jobs")


def run_diversity(config: PipelineConfig) -> dict:
    out_dir = Path(config.output_dir)
    dataset = artifacts.load_dataset_artifact(out_dir)
    matrix, tendrils = artifacts.load_features(out_dir)

    assignment = get_cluster_source(config).assign(matrix, tendrils)
    if assignment.source == ClusterSourceKind.RULES:
        clusters = list(RULE_CLUSTERS)
    else:
        clusters = list(assignment.clusters)

    regions = root_star_regions(dataset, config.region_min_count)
    scores = {r.root_star: diversity(r, assignment.labels, assignment.k) for r in regions}
    summary = region_summary(regions, scores, assignment.labels, clusters)

    outputs = [
        artifacts.save_clusters(out_dir, assignment),
        artifacts.write_csv(
            out_dir / artifacts.DIVERSITY_CSV,
            ("root_star", "member_count", "H"),
            [(r.root_star, r.member_count, scores[r.root_star]) for r in regions],
        ),
    ]
    sizes = {c: 0 for c in clusters}
    for label in assignment.labels.values():
        sizes[label] = sizes.get(label, 0) + 1
    report = {**summary, "cluster_sizes": dict(sorted(sizes.items()))}
    artifacts.write_manifest(
        out_dir,
        artifacts.DIVERSITY,
        outputs,
        params={
            "cluster_source": assignment.source.value,
            "k": assignment.k,
            "region_min_count": config.region_min_count,
            "clusters": clusters,
        },
        inputs={
            "dataset": artifacts.manifest_digest(out_dir, artifacts.DATASET),
            "features": artifacts.manifest_digest(out_dir, artifacts.FEATURES),
        },
        report=report,
    )
    logger.info(
        "[DIVERSITY] %d regions, mean H %.3f, %.0f%% below 0.5",
        summary["regions"], summary["mean_h"], 100 * summary["low_share"],
    )
    return report
