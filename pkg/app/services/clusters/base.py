"""Abstract base class for visual-signature cluster sources."""

from abc import ABC, abstractmethod
from typing import Mapping

from app.models.analysis import ClusterAssignment, ClusterSourceKind
from app.models.pipeline import PipelineConfig
from app.models.signature import FeatureMatrix


class ClusterSource(ABC):
    """
    Assigns every figure of a feature matrix to exactly one cluster.

    Each source (rules, k-means, an external label file) implements this interface.
    """

    kind: ClusterSourceKind

    def __init__(self, config: PipelineConfig):
        self.config = config

    @abstractmethod
    def assign(self, matrix: FeatureMatrix, tendrils: Mapping[str, int]) -> ClusterAssignment:
        """
        Label every row of ``matrix``.

        Args:
            matrix: Raw and standardized signatures, keyed by figure.
            tendrils: Degree-1 star count per figure key.

        Returns:
            ClusterAssignment covering every key of ``matrix``.
        """
