"""Ingest stage: read the raw inputs, validate, prune and persist the dataset."""

import logging
from collections import Counter
from pathlib import Path

from app.models.pipeline import PipelineConfig
from app.services import artifacts
from app.services.skyculture import discover_culture_files, load_dataset

logger = logging.getLogger("skysig.jobs")


def _input_hashes(config: PipelineConfig) -> dict[str, str]:
    hashes = {}
    for label, path in (("catalog", config.catalog), ("metadata", config.metadata), ("overrides", config.overrides)):
        if path is not None and Path(path).is_file():
            hashes[label] = artifacts.sha256_file(Path(path))
    if config.skycultures_dir is not None and Path(config.skycultures_dir).is_dir():
        for culture_id, path in discover_culture_files(Path(config.skycultures_dir)):
            hashes[f"skyculture:{culture_id}"] = artifacts.sha256_file(path)
    return hashes


def run_ingest(config: PipelineConfig) -> dict:
    """
    Load and validate every input, then write the dataset artifacts.

    Returns:
        dict report: culture and figure counts, figures per culture, dropped
        figures and pruned stars.
    """
    dataset = load_dataset(config)
    out_dir = Path(config.output_dir)
    outputs = artifacts.save_dataset(out_dir, dataset)

    per_culture = Counter(fig.culture_id for fig in dataset.figures)
    report = {
        "cultures": len(dataset.cultures),
        "figures": len(dataset.figures),
        "figures_per_culture": dict(sorted(per_culture.items())),
        "dropped": list(dataset.dropped),
        "pruned_stars": list(dataset.pruned_stars),
    }
    artifacts.write_manifest(
        out_dir,
        artifacts.DATASET,
        outputs,
        params={
            "prune_max_mag": config.prune_max_mag,
            "reconnection": config.reconnection.value,
            "star_id_prefix": config.star_id_prefix,
        },
        inputs=_input_hashes(config),
        report=report,
    )
    logger.info(
        "[INGEST] %d cultures, %d figures (%d dropped, %d faint stars pruned)",
        report["cultures"], report["figures"], len(dataset.dropped), len(dataset.pruned_stars),
    )
    return report
