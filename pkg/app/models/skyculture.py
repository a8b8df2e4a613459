"""Cultures, line figures and the validated dataset."""

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

from app.models.catalog import StarCatalog

Edge = tuple[str, str]


class Transmission(str, enum.Enum):
    WRITTEN = "written"
    ORAL = "oral"


class Use(str, enum.Enum):
    NAVIGATION = "navigation"
    RELIGIOUS = "religious"
    POLITICAL = "political"
    FOLK = "folk"


class Ancestry(str, enum.Enum):
    IAU_GREEK = "IAU/Greek-descended"
    MESOPOTAMIAN = "Mesopotamian"
    INDIAN = "Indian"
    CHINESE = "Chinese"
    AUSTRONESIAN = "Austronesian"
    POLYNESIAN = "Polynesian"
    N_AMERICAN = "N-American"
    S_AMERICAN = "S-American"
    SAMI = "Sami"
    EGYPTIAN = "Egyptian"
    UNCATEGORIZED = "uncategorized"


class Predictor(str, enum.Enum):
    """Categorical node attributes the mixing analysis can test."""

    CULTURE = "culture"
    TRANSMISSION = "transmission"
    USE = "use"
    ANCESTRY = "ancestry"


UNCATEGORIZED = "uncategorized"


def normalize_edge(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class LineFigure:
    """
    One constellation drawn as a spatial graph.

    Edges are unordered star-id pairs stored in normalized (sorted) form.
    """

    culture_id: str
    figure_id: str
    edges: tuple[Edge, ...]
    name: Optional[str] = None

    @property
    def key(self) -> str:
        return f"{self.culture_id}/{self.figure_id}"

    @property
    def stars(self) -> tuple[str, ...]:
        return tuple(sorted({s for edge in self.edges for s in edge}))


@dataclass(frozen=True)
class CultureRecord:
    culture_id: str
    transmission: Transmission
    uses: frozenset[Use]
    ancestry: Ancestry
    name: Optional[str] = None
    timestamp_note: str = ""


@dataclass(frozen=True)
class Dataset:
    catalog: StarCatalog
    cultures: tuple[CultureRecord, ...]
    figures: tuple[LineFigure, ...]
    use_overrides: Mapping[str, Use] = field(default_factory=dict)
    dropped: tuple[str, ...] = ()
    pruned_stars: tuple[str, ...] = ()

    @cached_property
    def _culture_index(self) -> dict[str, CultureRecord]:
        return {record.culture_id: record for record in self.cultures}

    @cached_property
    def _figure_index(self) -> dict[str, LineFigure]:
        return {fig.key: fig for fig in self.figures}

    def culture(self, culture_id: str) -> CultureRecord:
        return self._culture_index[culture_id]

    def figure(self, key: str) -> LineFigure:
        return self._figure_index[key]

    @property
    def figure_keys(self) -> tuple[str, ...]:
        return tuple(fig.key for fig in self.figures)
