"""Cluster labels supplied as a ``figure_id,cluster`` CSV file."""

import csv
import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional, TextIO

from app.core.errors import DataValidationError
from app.models.analysis import ClusterAssignment, ClusterSourceKind
from app.models.signature import FeatureMatrix
from app.services.clusters.base import ClusterSource

logger = logging.getLogger("skysig.clusters")


def load_labels(
    stream: TextIO,
    figure_keys: Iterable[str],
    source: Optional[str] = None,
) -> ClusterAssignment:
    """
    Read and validate a total cluster assignment over ``figure_keys``.

    Raises:
        DataValidationError: duplicate, unknown or missing figure ids, or fewer than two clusters.
    """
    expected = set(figure_keys)
    reader = csv.DictReader(stream)
    if not {"figure_id", "cluster"} <= set(reader.fieldnames or []):
        raise DataValidationError("cluster label header must contain figure_id,cluster", source, 1)

    labels: dict[str, str] = {}
    for row in reader:
        lineno = reader.line_num
        key = (row.get("figure_id") or "").strip()
        cluster = (row.get("cluster") or "").strip()
        if not key or not cluster:
            raise DataValidationError("empty figure_id or cluster", source, lineno)
        if key in labels:
            raise DataValidationError(f"duplicate figure id {key!r}", source, lineno)
        if key not in expected:
            raise DataValidationError(f"unknown figure id {key!r}", source, lineno)
        labels[key] = cluster

    missing = sorted(expected - set(labels))
    if missing:
        raise DataValidationError(f"figures without a cluster label: {', '.join(missing)}", source)
    k = len(set(labels.values()))
    if k < 2:
        raise DataValidationError("cluster labels must name at least two clusters", source)
    logger.info("Loaded %d cluster labels (%d clusters)", len(labels), k)
    return ClusterAssignment(labels=labels, source=ClusterSourceKind.EXTERNAL, k=k)


class ExternalLabelsSource(ClusterSource):
    kind = ClusterSourceKind.EXTERNAL

    def assign(self, matrix: FeatureMatrix, tendrils: Mapping[str, int]) -> ClusterAssignment:
        path = self.config.cluster_labels
        if path is None:
            raise DataValidationError("cluster_source = external needs cluster_labels")
        path = Path(path)
        if not path.is_file():
            raise DataValidationError("cluster label file not found", str(path))
        with path.open(encoding="utf-8", newline="") as fh:
            return load_labels(fh, matrix.keys, str(path))
