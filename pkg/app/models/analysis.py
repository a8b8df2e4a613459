"""Types produced by the embedding, mixing and region analyses."""

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.core.errors import DataValidationError


class TsneParams(BaseModel):
    """Exact t-SNE parameters; defaults reproduce the published run."""

    model_config = {"frozen": True}

    dims: int = Field(default=2, ge=1)
    perplexity: float = Field(default=32.0, gt=0)
    learning_rate: float = Field(default=50.0, gt=0)
    iterations: int = Field(default=20000, ge=1)
    restarts: int = Field(default=4, ge=1)
    early_exaggeration: float = Field(default=12.0, ge=1)
    exaggeration_iterations: int = Field(default=250, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_schedule(self) -> "TsneParams":
        if self.iterations < self.exaggeration_iterations:
            raise ValueError(
                f"iterations ({self.iterations}) must be >= exaggeration_iterations "
                f"({self.exaggeration_iterations})"
            )
        return self

    def check_sample_size(self, n: int) -> None:
        if n < 4:
            raise DataValidationError(f"t-SNE needs at least 4 points, got {n}")
        if self.perplexity >= (n - 1) / 3:
            raise DataValidationError(
                f"perplexity {self.perplexity} too large for {n} points (must be < {(n - 1) / 3:.3f})"
            )


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    kl_final: float
    params: TsneParams
    seed_used: int
    kl_per_restart: tuple[float, ...] = ()
    failed_restarts: tuple[int, ...] = ()


@dataclass(frozen=True)
class KnnGraph:
    """
    Directed nearest-neighbour graph with constant outdegree ``p``.

    ``out_edges[i]`` holds the row indices of node ``i``'s targets, nearest first.
    """

    nodes: tuple[str, ...]
    out_edges: np.ndarray
    labels: Mapping[str, str] = field(default_factory=dict)

    @property
    def p(self) -> int:
        return int(self.out_edges.shape[1])

    @property
    def n(self) -> int:
        return len(self.nodes)

    def edge_list(self) -> tuple[np.ndarray, np.ndarray]:
        """Sources and targets of every directed edge, in row order."""
        sources = np.repeat(np.arange(self.n), self.p)
        return sources, self.out_edges.reshape(-1)


@dataclass(frozen=True)
class MixingMatrix:
    classes: tuple[str, ...]
    e: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.e.sum(axis=1)

    @property
    def b(self) -> np.ndarray:
        return self.e.sum(axis=0)


@dataclass(frozen=True)
class AssortativityResult:
    r_raw: float
    r_max: float
    r: float
    sigma_r: float


@dataclass(frozen=True)
class SkyRegion:
    root_star: str
    members: tuple[str, ...]

    @property
    def member_count(self) -> int:
        return len(self.members)


class ClusterSourceKind(str, enum.Enum):
    EXTERNAL = "external"
    RULES = "rules"
    KMEANS = "kmeans"


@dataclass(frozen=True)
class ClusterAssignment:
    labels: Mapping[str, str]
    source: ClusterSourceKind
    k: int

    @property
    def clusters(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels.values())))
