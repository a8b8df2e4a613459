"""Validated pipeline configuration."""

import enum
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

from app.models.analysis import ClusterSourceKind, TsneParams


class Reconnection(str, enum.Enum):
    CHAIN = "chain"
    STAR_TO_NEAREST = "star_to_nearest"


class CycleBasisMode(str, enum.Enum):
    BFS = "bfs"
    MINIMUM = "minimum"


class RuleThresholds(BaseModel):
    """Tunable thresholds of the rule-based cluster classifier."""

    model_config = {"frozen": True}

    c3_min_diameter: float = Field(default=35.0, gt=0, le=180)
    c3_max_mag: float = 2.0


class PipelineConfig(BaseModel):
    model_config = {"frozen": True, "extra": "forbid"}

    catalog: Optional[Path] = None
    skycultures_dir: Optional[Path] = None
    metadata: Optional[Path] = None
    overrides: Optional[Path] = None
    output_dir: Path = Path("out")
    star_id_prefix: str = ""

    prune_max_mag: float = 7.0
    reconnection: Reconnection = Reconnection.CHAIN
    cycle_basis: CycleBasisMode = CycleBasisMode.BFS

    seed: int = 0
    workers: int = Field(default=1, ge=1)
    tsne: TsneParams = TsneParams()
    trust_k: Optional[int] = Field(default=None, ge=1)

    knn_p: Union[int, str] = "auto"
    similarity_threshold: Union[float, str] = 0.0
    similarity_raw: bool = False
    merge_greek_ancestry: bool = True

    region_min_count: int = Field(default=20, ge=1)
    cluster_source: ClusterSourceKind = ClusterSourceKind.RULES
    cluster_labels: Optional[Path] = None
    kmeans_k: int = Field(default=7, ge=2)
    rules: RuleThresholds = RuleThresholds()

    @field_validator("knn_p")
    @classmethod
    def _check_knn_p(cls, value: Union[int, str]) -> Union[int, str]:
        if isinstance(value, str):
            if value.strip().lower() == "auto":
                return "auto"
            value = int(value)
        if value < 1:
            raise ValueError("knn_p must be >= 1 or 'auto'")
        return value

    @field_validator("similarity_threshold")
    @classmethod
    def _check_threshold(cls, value: Union[float, str]) -> Union[float, str]:
        if isinstance(value, str):
            if value.strip().lower() == "auto":
                return "auto"
            value = float(value)
        if value < 0:
            raise ValueError("similarity_threshold must be >= 0 or 'auto'")
        return value

    def resolved_trust_k(self) -> int:
        return self.trust_k or max(1, int(round(self.tsne.perplexity)))

    def tsne_params(self) -> TsneParams:
        """t-SNE parameters with the pipeline seed applied."""
        return self.tsne.model_copy(update={"seed": self.seed})
