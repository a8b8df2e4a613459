"""
On-disk pipeline artifacts: CSV tables plus a JSON manifest per stage that
records the stage parameters and the sha256 of every file it wrote.
Downstream stages verify the manifests they depend on before reading.
"""

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from app.core.errors import StaleArtifactError
from app.models.analysis import ClusterAssignment, ClusterSourceKind, KnnGraph
from app.models.catalog import StarCatalog
from app.models.signature import FEATURE_CODES, FEATURE_NAMES, FeatureMatrix
from app.models.skyculture import Dataset, LineFigure, normalize_edge
from app.services.skyculture import (
    parse_culture_metadata,
    parse_use_overrides,
    serialize_culture_metadata,
    serialize_use_overrides,
)
from app.services.star_catalog import parse_catalog, serialize_catalog

logger = logging.getLogger("skysig.artifacts")

DATASET = "dataset"
FEATURES = "features"
EMBEDDING = "embedding"
KNN = "knn"
DIVERSITY = "diversity"
STAGES = frozenset({DATASET, FEATURES, EMBEDDING, KNN, DIVERSITY})

STARS_CSV = "stars.csv"
CULTURES_CSV = "cultures.csv"
OVERRIDES_CSV = "overrides.csv"
DATASET_CSV = "dataset.csv"
FEATURES_CSV = "features.csv"
FEATURES_STD_CSV = "features_std.csv"
SCALING_CSV = "scaling.csv"
CULTURE_SUMMARY_CSV = "culture_summary.csv"
EMBEDDING_CSV = "embedding.csv"
KNN_CSV = "knn.csv"
CLUSTERS_CSV = "clusters.csv"
DIVERSITY_CSV = "diversity.csv"


def assortativity_name(predictor: str) -> str:
    return f"assortativity_{predictor}"


def similarity_name(predictor: str) -> str:
    return f"similarity_{predictor}"


# ---------------------------------------------------------------------------
# Low-level helpers
# ---------------------------------------------------------------------------


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path: Path, text: str) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def read_csv(path: Path) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise StaleArtifactError("artifact missing", str(path))
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _split_key(key: str) -> tuple[str, str]:
    culture_id, _, figure_id = key.partition("/")
    return culture_id, figure_id


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def manifest_path(out_dir: Path, stage: str) -> Path:
    return Path(out_dir) / f"{stage}.manifest.json"


def write_manifest(
    out_dir: Path,
    stage: str,
    outputs: Iterable[Path],
    params: Optional[Mapping[str, Any]] = None,
    inputs: Optional[Mapping[str, str]] = None,
    report: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Record parameters, upstream hashes and the sha256 of every output. No timestamps."""
    manifest = {
        "stage": stage,
        "params": dict(params or {}),
        "inputs": dict(sorted((inputs or {}).items())),
        "outputs": {Path(p).name: sha256_file(p) for p in sorted(outputs, key=lambda p: Path(p).name)},
        "report": dict(report or {}),
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return atomic_write_text(manifest_path(out_dir, stage), text)


def verify_manifest(out_dir: Path, stage: str) -> dict:
    """
    Load a stage manifest, re-hash its outputs and walk the chain of upstream
    stages it was built from.

    Raises:
        StaleArtifactError: manifest or output missing, an output changed since
            it was written, or an upstream stage was re-run after this one.
    """
    path = manifest_path(out_dir, stage)
    if not path.is_file():
        raise StaleArtifactError(f"upstream stage '{stage}' has not been run", str(path))
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StaleArtifactError(f"unreadable manifest: {exc}", str(path)) from exc
    for name, digest in manifest.get("outputs", {}).items():
        output = Path(out_dir) / name
        if not output.is_file():
            raise StaleArtifactError("artifact missing", str(output))
        if sha256_file(output) != digest:
            raise StaleArtifactError("artifact changed since it was written (hash mismatch)", str(output))
    for upstream, digest in manifest.get("inputs", {}).items():
        if upstream not in STAGES:
            continue
        verify_manifest(out_dir, upstream)
        if manifest_digest(out_dir, upstream) != digest:
            raise StaleArtifactError(
                f"stage '{upstream}' was re-run after '{stage}' (hash mismatch); re-run '{stage}'", str(path)
            )
    return manifest


def manifest_digest(out_dir: Path, stage: str) -> str:
    return sha256_file(manifest_path(out_dir, stage))


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


def save_dataset(out_dir: Path, dataset: Dataset) -> list[Path]:
    """Persist everything downstream stages need to rebuild the Dataset."""
    out_dir = Path(out_dir)
    used = sorted({s for fig in dataset.figures for s in fig.stars})
    catalog = StarCatalog({sid: dataset.catalog.get(sid) for sid in used})
    rows = [
        (fig.culture_id, fig.figure_id, len(fig.edges), " ".join(f"{a} {b}" for a, b in fig.edges))
        for fig in dataset.figures
    ]
    return [
        atomic_write_text(out_dir / STARS_CSV, serialize_catalog(catalog)),
        atomic_write_text(out_dir / CULTURES_CSV, serialize_culture_metadata(dataset.cultures)),
        atomic_write_text(out_dir / OVERRIDES_CSV, serialize_use_overrides(dataset.use_overrides)),
        write_csv(out_dir / DATASET_CSV, ("culture_id", "figure_id", "n_lines", "lines"), rows),
    ]


def load_dataset_artifact(out_dir: Path) -> Dataset:
    out_dir = Path(out_dir)
    manifest = verify_manifest(out_dir, DATASET)
    with (out_dir / STARS_CSV).open(encoding="utf-8", newline="") as fh:
        catalog = parse_catalog(fh, str(out_dir / STARS_CSV))
    with (out_dir / CULTURES_CSV).open(encoding="utf-8", newline="") as fh:
        cultures = parse_culture_metadata(fh, str(out_dir / CULTURES_CSV))
    with (out_dir / OVERRIDES_CSV).open(encoding="utf-8", newline="") as fh:
        overrides = parse_use_overrides(fh, str(out_dir / OVERRIDES_CSV))

    figures = []
    for row in read_csv(out_dir / DATASET_CSV):
        tokens = row["lines"].split()
        edges = tuple(sorted(normalize_edge(a, b) for a, b in zip(tokens[0::2], tokens[1::2])))
        figures.append(LineFigure(culture_id=row["culture_id"], figure_id=row["figure_id"], edges=edges))
    report = manifest.get("report", {})
    return Dataset(
        catalog=catalog,
        cultures=tuple(cultures),
        figures=tuple(figures),
        use_overrides=overrides,
        dropped=tuple(report.get("dropped", ())),
        pruned_stars=tuple(report.get("pruned_stars", ())),
    )


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


def save_features(
    out_dir: Path,
    matrix: FeatureMatrix,
    tendrils: Mapping[str, int],
    summary: list[dict],
) -> list[Path]:
    out_dir = Path(out_dir)
    keys = [_split_key(key) for key in matrix.keys]
    raw_rows = []
    for (culture_id, figure_id), key, row in zip(keys, matrix.keys, matrix.raw):
        values = [int(v) if float(v).is_integer() else float(v) for v in row]
        raw_rows.append((culture_id, figure_id, *values, tendrils[key]))
    std_rows = [(c, f, *map(float, row)) for (c, f), row in zip(keys, matrix.standardized)]
    scaling_rows = [
        (code, name, float(mean), float(scale))
        for code, name, mean, scale in zip(FEATURE_CODES, FEATURE_NAMES, matrix.mean, matrix.scale)
    ]
    summary_header = list(summary[0].keys()) if summary else ["culture_id", "count"]
    return [
        write_csv(out_dir / FEATURES_CSV, ("culture_id", "figure_id", *FEATURE_CODES, "tendrils"), raw_rows),
        write_csv(out_dir / FEATURES_STD_CSV, ("culture_id", "figure_id", *FEATURE_CODES), std_rows),
        write_csv(out_dir / SCALING_CSV, ("feature", "name", "mean", "scale"), scaling_rows),
        write_csv(out_dir / CULTURE_SUMMARY_CSV, summary_header, ([r[h] for h in summary_header] for r in summary)),
    ]


def load_features(out_dir: Path) -> tuple[FeatureMatrix, dict[str, int]]:
    """Feature matrix and per-figure tendril counts written by the features stage."""
    out_dir = Path(out_dir)
    verify_manifest(out_dir, FEATURES)
    raw_rows = read_csv(out_dir / FEATURES_CSV)
    std_rows = read_csv(out_dir / FEATURES_STD_CSV)
    scaling = read_csv(out_dir / SCALING_CSV)
    if len(raw_rows) != len(std_rows):
        raise StaleArtifactError("features.csv and features_std.csv disagree on row count", str(out_dir))
    keys = tuple(f"{r['culture_id']}/{r['figure_id']}" for r in raw_rows)
    return (
        FeatureMatrix(
            keys=keys,
            culture_ids=tuple(r["culture_id"] for r in raw_rows),
            raw=np.array([[float(r[c]) for c in FEATURE_CODES] for r in raw_rows]),
            standardized=np.array([[float(r[c]) for c in FEATURE_CODES] for r in std_rows]),
            mean=np.array([float(r["mean"]) for r in scaling]),
            scale=np.array([float(r["scale"]) for r in scaling]),
        ),
        {key: int(r["tendrils"]) for key, r in zip(keys, raw_rows)},
    )


# ---------------------------------------------------------------------------
# Embedding, kNN graph, clusters
# ---------------------------------------------------------------------------


def save_embedding(out_dir: Path, keys: Sequence[str], coords: np.ndarray) -> Path:
    rows = [(*_split_key(key), float(x), float(y)) for key, (x, y) in zip(keys, coords[:, :2])]
    return write_csv(Path(out_dir) / EMBEDDING_CSV, ("culture_id", "figure_id", "x", "y"), rows)


def load_embedding(out_dir: Path) -> tuple[tuple[str, ...], np.ndarray, dict]:
    manifest = verify_manifest(out_dir, EMBEDDING)
    rows = read_csv(Path(out_dir) / EMBEDDING_CSV)
    keys = tuple(f"{r['culture_id']}/{r['figure_id']}" for r in rows)
    coords = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    return keys, coords, manifest


def save_knn(out_dir: Path, graph: KnnGraph) -> Path:
    rows = []
    for i, node in enumerate(graph.nodes):
        for rank, j in enumerate(graph.out_edges[i], start=1):
            rows.append((node, rank, graph.nodes[j]))
    return write_csv(Path(out_dir) / KNN_CSV, ("source", "rank", "target"), rows)


def load_knn(out_dir: Path) -> KnnGraph:
    manifest = verify_manifest(out_dir, KNN)
    rows = read_csv(Path(out_dir) / KNN_CSV)
    p = int(manifest["params"]["p"])
    nodes = tuple(dict.fromkeys(r["source"] for r in rows))
    index = {node: i for i, node in enumerate(nodes)}
    out_edges = np.zeros((len(nodes), p), dtype=int)
    for r in rows:
        out_edges[index[r["source"]], int(r["rank"]) - 1] = index[r["target"]]
    return KnnGraph(nodes=nodes, out_edges=out_edges)


def save_clusters(out_dir: Path, assignment: ClusterAssignment) -> Path:
    rows = sorted(assignment.labels.items())
    return write_csv(Path(out_dir) / CLUSTERS_CSV, ("figure_id", "cluster"), rows)


def load_clusters(out_dir: Path) -> ClusterAssignment:
    manifest = verify_manifest(out_dir, DIVERSITY)
    rows = read_csv(Path(out_dir) / CLUSTERS_CSV)
    params = manifest["params"]
    return ClusterAssignment(
        labels={r["figure_id"]: r["cluster"] for r in rows},
        source=ClusterSourceKind(params["cluster_source"]),
        k=int(params["k"]),
    )
