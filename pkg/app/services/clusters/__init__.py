from app.services.clusters.base import ClusterSource
from app.services.clusters.external import ExternalLabelsSource, load_labels
from app.services.clusters.factory import get_cluster_source
from app.services.clusters.kmeans import KMeansSource, kmeans
from app.services.clusters.rules import RULE_CLUSTERS, RulesSource, classify_rules

__all__ = [
    "ClusterSource",
    "ExternalLabelsSource",
    "KMeansSource",
    "RULE_CLUSTERS",
    "RulesSource",
    "classify_rules",
    "get_cluster_source",
    "kmeans",
    "load_labels",
]
