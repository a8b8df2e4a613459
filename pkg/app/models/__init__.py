from app.models.analysis import (
    AssortativityResult,
    ClusterAssignment,
    ClusterSourceKind,
    Embedding,
    KnnGraph,
    MixingMatrix,
    SkyRegion,
    TsneParams,
)
from app.models.catalog import Star, StarCatalog, UnitVector
from app.models.pipeline import CycleBasisMode, PipelineConfig, Reconnection, RuleThresholds
from app.models.signature import (
    FEATURE_CODES,
    FEATURE_NAMES,
    NO_ANGLE,
    FeatureMatrix,
    SignatureVector,
)
from app.models.skyculture import (
    UNCATEGORIZED,
    Ancestry,
    CultureRecord,
    Dataset,
    LineFigure,
    Predictor,
    Transmission,
    Use,
    normalize_edge,
)

__all__ = [
    "AssortativityResult",
    "Ancestry",
    "ClusterAssignment",
    "ClusterSourceKind",
    "CultureRecord",
    "CycleBasisMode",
    "Dataset",
    "Embedding",
    "FEATURE_CODES",
    "FEATURE_NAMES",
    "FeatureMatrix",
    "KnnGraph",
    "LineFigure",
    "MixingMatrix",
    "NO_ANGLE",
    "PipelineConfig",
    "Predictor",
    "Reconnection",
    "RuleThresholds",
    "SignatureVector",
    "SkyRegion",
    "Star",
    "StarCatalog",
    "TsneParams",
    "Transmission",
    "UNCATEGORIZED",
    "UnitVector",
    "Use",
    "normalize_edge",
]
