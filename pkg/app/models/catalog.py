"""Star catalog domain types."""

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from app.core.errors import DataValidationError


@dataclass(frozen=True)
class UnitVector:
    """Cartesian point on the unit celestial sphere."""

    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Star:
    """
    One catalog entry.

    ``ra`` and ``dec`` are equatorial coordinates in degrees; ``mag`` is the
    apparent visual magnitude (lower is brighter).
    """

    id: str
    ra: float
    dec: float
    mag: float

    def __post_init__(self) -> None:
        if not self.id:
            raise DataValidationError("empty star id")
        if not 0.0 <= self.ra < 360.0:
            raise DataValidationError(f"ra out of range for {self.id}: {self.ra}")
        if not -90.0 <= self.dec <= 90.0:
            raise DataValidationError(f"dec out of range for {self.id}: {self.dec}")


@dataclass(frozen=True)
class StarCatalog:
    stars: Mapping[str, Star] = field(default_factory=dict)

    def __contains__(self, star_id: object) -> bool:
        return star_id in self.stars

    def __len__(self) -> int:
        return len(self.stars)

    def __iter__(self) -> Iterator[Star]:
        return iter(self.stars.values())

    def get(self, star_id: str) -> Star:
        try:
            return self.stars[star_id]
        except KeyError:
            raise DataValidationError(f"unknown star id {star_id!r}") from None
