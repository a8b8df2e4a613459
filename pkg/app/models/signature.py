"""The 19-feature visual signature and the dataset-wide feature matrix."""

from dataclasses import astuple, dataclass, fields

import numpy as np

# Sentinel for figures without any pair of incident links (max degree 1)
NO_ANGLE = 360.0


@dataclass(frozen=True)
class SignatureVector:
    num_links: int
    max_degree: int
    avg_degree: float
    clustering: float
    max_core: int
    num_cycles: int
    largest_cycle: int
    num_components: int
    avg_component_diameter: float
    avg_shortest_path: float
    link_connectivity: int
    spatial_diameter: float
    avg_link_length: float
    sharpest_angle: float
    avg_angle: float
    planar: int
    avg_mag: float
    min_mag: float
    max_mag: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.as_tuple(), dtype=float)

    @classmethod
    def from_values(cls, values) -> "SignatureVector":
        converted = []
        for fld, value in zip(fields(cls), values):
            converted.append(int(round(float(value))) if fld.type in (int, "int") else float(value))
        return cls(*converted)


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in fields(SignatureVector))
FEATURE_CODES: tuple[str, ...] = tuple(f"s{i}" for i in range(1, len(FEATURE_NAMES) + 1))


def feature_index(code: str) -> int:
    """Column index for a feature given as ``s12`` or ``spatial_diameter``."""
    if code in FEATURE_CODES:
        return FEATURE_CODES.index(code)
    if code in FEATURE_NAMES:
        return FEATURE_NAMES.index(code)
    raise KeyError(code)


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Raw and standardized signatures for every figure.

    Rows follow ``keys`` (ordered by culture id, then figure id). ``mean`` and
    ``scale`` form the scaling record: ``standardized = (raw - mean) / scale``,
    with ``scale`` set to 1 for constant columns so they map to 0.
    """

    keys: tuple[str, ...]
    culture_ids: tuple[str, ...]
    raw: np.ndarray
    standardized: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n(self) -> int:
        return len(self.keys)

    def row(self, key: str) -> int:
        return self.keys.index(key)

    def inverse_transform(self, values: np.ndarray) -> np.ndarray:
        return values * self.scale + self.mean
