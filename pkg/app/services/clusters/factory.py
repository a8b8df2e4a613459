"""
Cluster source selection from the pipeline config.
"""

import logging

from app.models.analysis import ClusterSourceKind
from app.models.pipeline import PipelineConfig
from app.services.clusters.base import ClusterSource
from app.services.clusters.external import ExternalLabelsSource
from app.services.clusters.kmeans import KMeansSource
from app.services.clusters.rules import RulesSource

logger = logging.getLogger("skysig.clusters.factory")


def get_cluster_source(config: PipelineConfig) -> ClusterSource:
    """Get the cluster source named by ``config.cluster_source``.

    Supported sources:
    - "rules" (default): rule-based C1-C7 classifier
    - "kmeans": k-means on the standardized signatures, ``kmeans_k`` clusters
    - "external": labels read from ``cluster_labels``
    """
    kind = config.cluster_source
    logger.debug("Selecting cluster source '%s'", kind.value)
    if kind == ClusterSourceKind.EXTERNAL:
        return ExternalLabelsSource(config)
    if kind == ClusterSourceKind.KMEANS:
        return KMeansSource(config)
    return RulesSource(config)
