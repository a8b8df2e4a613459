"""Embedding stage: exact t-SNE of the standardized signatures."""

import logging
import math
from pathlib import Path

from app.models.pipeline import PipelineConfig
from app.services import artifacts
from app.services.manifold import trustworthiness, tsne

logger = logging.getLogger("skysig.jobs")


def run_embed(config: PipelineConfig) -> dict:
    out_dir = Path(config.output_dir)
    matrix, _ = artifacts.load_features(out_dir)
    params = config.tsne_params()

    embedding = tsne(matrix.standardized, params)
    trust_k = config.resolved_trust_k()
    trust = None
    if trust_k < matrix.n / 2:
        trust = trustworthiness(matrix.standardized, embedding.coords, trust_k)
    else:
        logger.warning("[EMBED] trust_k=%d too large for %d figures; trustworthiness skipped", trust_k, matrix.n)

    output = artifacts.save_embedding(out_dir, matrix.keys, embedding.coords)
    report = {
        "kl_final": embedding.kl_final,
        "kl_per_restart": [None if math.isnan(kl) else kl for kl in embedding.kl_per_restart],
        "failed_restarts": list(embedding.failed_restarts),
        "trust_k": trust_k,
        "trustworthiness": trust,
    }
    artifacts.write_manifest(
        out_dir,
        artifacts.EMBEDDING,
        [output],
        params=params.model_dump(),
        inputs={"features": artifacts.manifest_digest(out_dir, artifacts.FEATURES)},
        report=report,
    )
    logger.info("[EMBED] KL %.6f, trustworthiness %s", embedding.kl_final, trust)
    return report
