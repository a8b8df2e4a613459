"""
Rule-based approximation of the seven visual-signature clusters.

    C1  single segments
    C2  lines and trees
    C3  spatially large, very bright figures
    C4  non-planar figures
    C5  cycles with tendrils
    C6  triangles and triangular meshes without tendrils
    C7  cycles longer than three links without tendrils
"""

import logging
from typing import Mapping

from app.models.analysis import ClusterAssignment, ClusterSourceKind
from app.models.pipeline import RuleThresholds
from app.models.signature import FeatureMatrix, SignatureVector
from app.services.clusters.base import ClusterSource

logger = logging.getLogger("skysig.clusters")

RULE_CLUSTERS = ("C1", "C2", "C3", "C4", "C5", "C6", "C7")


def classify_rules(
    sig: SignatureVector,
    tendrils: int,
    thresholds: RuleThresholds = RuleThresholds(),
) -> str:
    """First matching rule wins, in the order C1, C4, C3, C6, C7, C5, C2."""
    if sig.num_links == 1:
        return "C1"
    if sig.planar == 0:
        return "C4"
    if sig.spatial_diameter >= thresholds.c3_min_diameter and sig.avg_mag <= thresholds.c3_max_mag:
        return "C3"
    if sig.num_cycles >= 1 and tendrils == 0:
        if sig.largest_cycle == 3:
            return "C6"
        if sig.largest_cycle > 3:
            return "C7"
    if sig.num_cycles >= 1:
        return "C5"
    return "C2"


class RulesSource(ClusterSource):
    kind = ClusterSourceKind.RULES

    def assign(self, matrix: FeatureMatrix, tendrils: Mapping[str, int]) -> ClusterAssignment:
        labels = {}
        for key, row in zip(matrix.keys, matrix.raw):
            sig = SignatureVector.from_values(row)
            labels[key] = classify_rules(sig, tendrils[key], self.config.rules)
        return ClusterAssignment(labels=labels, source=self.kind, k=len(RULE_CLUSTERS))
