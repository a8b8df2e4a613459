"""Features stage: visual signature of every figure plus the standardized matrix."""

import logging
from pathlib import Path

from app.models.pipeline import PipelineConfig
from app.services import artifacts
from app.services.features import build_feature_matrix, compute_signatures, culture_summary, tendril_count
from app.services.skyculture import figure_graph

logger = logging.getLogger("skysig.jobs")


def run_features(config: PipelineConfig) -> dict:
    out_dir = Path(config.output_dir)
    dataset = artifacts.load_dataset_artifact(out_dir)

    signatures = compute_signatures(dataset, config.cycle_basis, config.workers)
    matrix = build_feature_matrix(dataset, signatures=signatures)
    tendrils = {fig.key: tendril_count(figure_graph(fig)) for fig in dataset.figures}
    summary = culture_summary(matrix)

    outputs = artifacts.save_features(out_dir, matrix, tendrils, summary)
    report = {"figures": matrix.n, "features": int(matrix.raw.shape[1])}
    artifacts.write_manifest(
        out_dir,
        artifacts.FEATURES,
        outputs,
        params={"cycle_basis": config.cycle_basis.value},
        inputs={"dataset": artifacts.manifest_digest(out_dir, artifacts.DATASET)},
        report=report,
    )
    logger.info("[FEATURES] %d figures x %d features", report["figures"], report["features"])
    return report
