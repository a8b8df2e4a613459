"""
Visual signature of a line figure: 19 network, spatial and brightness features.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Optional

import networkx as nx
import numpy as np
from networkx.algorithms.connectivity import local_edge_connectivity
from sklearn.preprocessing import StandardScaler

from app.core.errors import DataValidationError, DegenerateGeometryError
from app.models.catalog import StarCatalog
from app.models.pipeline import CycleBasisMode
from app.models.signature import FEATURE_CODES, NO_ANGLE, FeatureMatrix, SignatureVector
from app.models.skyculture import Dataset, LineFigure
from app.services.skyculture import figure_graph
from app.services.spherical import angular_separation, geodesics_cross, vertex_angle
from app.services.star_catalog import positions

logger = logging.getLogger("skysig.features")

# Links shorter than this (degrees) join coincident stars
MIN_LINK_LENGTH = 1e-9

SUMMARY_FEATURES = ("s1", "s12", "s16", "s17")

Cycle = list[tuple[str, str]]


def _bfs_forest(graph: nx.Graph) -> tuple[dict[str, Optional[str]], dict[str, int]]:
    parent: dict[str, Optional[str]] = {}
    depth: dict[str, int] = {}
    for root in sorted(graph.nodes):
        if root in parent:
            continue
        parent[root] = None
        depth[root] = 0
        queue = [root]
        while queue:
            node = queue.pop(0)
            for nbr in sorted(graph.neighbors(node)):
                if nbr not in parent:
                    parent[nbr] = node
                    depth[nbr] = depth[node] + 1
                    queue.append(nbr)
    return parent, depth


def _fundamental_cycle(
    u: str, v: str, parent: dict[str, Optional[str]], depth: dict[str, int]
) -> Cycle:
    left, right = [u], [v]
    while depth[left[-1]] > depth[right[-1]]:
        left.append(parent[left[-1]])
    while depth[right[-1]] > depth[left[-1]]:
        right.append(parent[right[-1]])
    while left[-1] != right[-1]:
        left.append(parent[left[-1]])
        right.append(parent[right[-1]])
    nodes = left + right[-2::-1]
    return [(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1)] + [(v, u)]


def cycle_basis(graph: nx.Graph, mode: CycleBasisMode = CycleBasisMode.BFS) -> list[Cycle]:
    """
    Cycle basis as edge lists; ``len(result) == m - n + c``.

    ``bfs`` builds fundamental cycles of a BFS spanning forest rooted at the
    lowest star id of each component (deterministic). ``minimum`` returns a
    minimum-length basis.
    """
    if mode == CycleBasisMode.MINIMUM:
        cycles = []
        for nodes in nx.minimum_cycle_basis(graph):
            # minimum basis cycles are chordless, so the induced subgraph is the ring itself
            ring = graph.subgraph(nodes)
            cycles.append([(u, v) for u, v in nx.find_cycle(ring, source=min(nodes))])
        return sorted(cycles, key=lambda c: (len(c), sorted(c)))

    parent, depth = _bfs_forest(graph)
    tree = {frozenset((child, par)) for child, par in parent.items() if par is not None}
    chords = sorted(tuple(sorted(edge)) for edge in graph.edges if frozenset(edge) not in tree)
    return [_fundamental_cycle(u, v, parent, depth) for u, v in chords]


def edge_connectivity(graph: nx.Graph) -> int:
    """Minimum unit-capacity max-flow between the lowest node and every other node."""
    nodes = sorted(graph.nodes)
    if len(nodes) < 2:
        return 0
    source = nodes[0]
    return min(local_edge_connectivity(graph, source, target) for target in nodes[1:])


def tendril_count(graph: nx.Graph) -> int:
    """Number of degree-1 stars."""
    return sum(1 for _, deg in graph.degree() if deg == 1)


def structural_features(graph: nx.Graph, mode: CycleBasisMode = CycleBasisMode.BFS) -> tuple:
    """s1-s11 of a graph without isolated nodes and with at least one edge."""
    n = graph.number_of_nodes()
    m = graph.number_of_edges()
    degrees = [deg for _, deg in graph.degree()]
    basis = cycle_basis(graph, mode)
    components = [graph.subgraph(c) for c in nx.connected_components(graph)]
    multi = [comp for comp in components if comp.number_of_nodes() >= 2]
    diameters = [nx.diameter(comp) for comp in multi]
    path_lengths = [nx.average_shortest_path_length(comp) for comp in multi]
    n_components = len(components)

    return (
        m,
        max(degrees),
        2.0 * m / n,
        float(nx.average_clustering(graph)),
        max(nx.core_number(graph).values()),
        len(basis),
        max((len(c) for c in basis), default=0),
        n_components,
        float(np.mean(diameters)),
        float(np.mean(path_lengths)),
        edge_connectivity(graph) if n_components == 1 else 0,
    )


def _pairwise_separation(vectors: np.ndarray) -> np.ndarray:
    cross = np.cross(vectors[:, None, :], vectors[None, :, :])
    dots = np.einsum("ik,jk->ij", vectors, vectors)
    return np.degrees(np.arctan2(np.linalg.norm(cross, axis=2), dots))


def _angles(graph: nx.Graph, pos: dict[str, np.ndarray]) -> list[float]:
    angles = []
    for node in sorted(graph.nodes):
        for p, q in combinations(sorted(graph.neighbors(node)), 2):
            angles.append(vertex_angle(pos[node], pos[p], pos[q]))
    return angles


def _is_planar(figure: LineFigure, pos: dict[str, np.ndarray]) -> bool:
    for (a1, a2), (b1, b2) in combinations(figure.edges, 2):
        if {a1, a2} & {b1, b2}:
            continue
        try:
            if geodesics_cross(pos[a1], pos[a2], pos[b1], pos[b2]):
                return False
        except DegenerateGeometryError:
            logger.warning(
                "%s: links %s-%s and %s-%s overlap on one great circle; counted as a crossing",
                figure.key, a1, a2, b1, b2,
            )
            return False
    return True


def compute_signature(
    figure: LineFigure,
    catalog: StarCatalog,
    mode: CycleBasisMode = CycleBasisMode.BFS,
) -> SignatureVector:
    """
    All 19 features of one figure.

    Raises:
        DegenerateGeometryError: a link joins two coincident stars.
    """
    if not figure.edges:
        raise DataValidationError(f"{figure.key}: figure has no lines")
    graph = figure_graph(figure)
    structural = structural_features(graph, mode)

    stars = figure.stars
    pos = positions(catalog, stars)
    vectors = np.stack([pos[s] for s in stars])

    lengths = [angular_separation(pos[a], pos[b]) for a, b in figure.edges]
    if min(lengths) < MIN_LINK_LENGTH:
        raise DegenerateGeometryError(f"{figure.key}: link joins coincident stars")
    spatial_diameter = float(_pairwise_separation(vectors).max())

    try:
        angles = _angles(graph, pos)
    except DegenerateGeometryError as exc:
        raise DegenerateGeometryError(f"{figure.key}: {exc}") from exc
    if angles:
        sharpest, average = float(min(angles)), float(np.mean(angles))
    else:
        sharpest = average = NO_ANGLE

    mags = np.array([catalog.get(s).mag for s in stars])
    return SignatureVector(
        *structural,
        spatial_diameter,
        float(np.mean(lengths)),
        sharpest,
        average,
        1 if _is_planar(figure, pos) else 0,
        float(mags.mean()),
        float(mags.min()),
        float(mags.max()),
    )


def compute_signatures(
    dataset: Dataset,
    mode: CycleBasisMode = CycleBasisMode.BFS,
    workers: int = 1,
) -> dict[str, SignatureVector]:
    """Signatures for every figure, keyed and ordered like ``dataset.figures``."""

    def one(fig: LineFigure) -> SignatureVector:
        return compute_signature(fig, dataset.catalog, mode)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, dataset.figures))
    else:
        results = [one(fig) for fig in dataset.figures]
    return {fig.key: sig for fig, sig in zip(dataset.figures, results)}


def standardize(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feature-wise standard scaling; constant columns map to 0."""
    scaler = StandardScaler()
    standardized = scaler.fit_transform(raw)
    return standardized, scaler.mean_.copy(), scaler.scale_.copy()


def feature_matrix_from_rows(
    keys: list[str], culture_ids: list[str], raw: np.ndarray
) -> FeatureMatrix:
    if len(keys) < 2:
        raise DataValidationError(f"feature matrix needs at least 2 figures, got {len(keys)}")
    order = sorted(range(len(keys)), key=lambda i: (culture_ids[i], keys[i]))
    raw = np.asarray(raw, dtype=float)[order]
    standardized, mean, scale = standardize(raw)
    return FeatureMatrix(
        keys=tuple(keys[i] for i in order),
        culture_ids=tuple(culture_ids[i] for i in order),
        raw=raw,
        standardized=standardized,
        mean=mean,
        scale=scale,
    )


def build_feature_matrix(
    dataset: Dataset,
    mode: CycleBasisMode = CycleBasisMode.BFS,
    workers: int = 1,
    signatures: Optional[dict[str, SignatureVector]] = None,
) -> FeatureMatrix:
    """Raw and standardized matrix over the dataset, rows in (culture, figure) order."""
    if signatures is None:
        signatures = compute_signatures(dataset, mode, workers)
    keys = [fig.key for fig in dataset.figures]
    culture_ids = [fig.culture_id for fig in dataset.figures]
    raw = np.stack([signatures[key].as_array() for key in keys])
    matrix = feature_matrix_from_rows(keys, culture_ids, raw)
    logger.info("Feature matrix: %d figures x %d features", matrix.n, raw.shape[1])
    return matrix


def culture_summary(matrix: FeatureMatrix) -> list[dict]:
    """Per-culture size plus mean and standard deviation of s1, s12, s16, s17; last row is global."""
    columns = [FEATURE_CODES.index(code) for code in SUMMARY_FEATURES]
    cultures = np.asarray(matrix.culture_ids)
    groups = [(cid, cultures == cid) for cid in sorted(set(matrix.culture_ids))]
    groups.append(("ALL", np.ones(matrix.n, dtype=bool)))
    rows = []
    for culture_id, mask in groups:
        row: dict = {"culture_id": culture_id, "count": int(mask.sum())}
        block = matrix.raw[mask][:, columns]
        for code, mean, std in zip(SUMMARY_FEATURES, block.mean(axis=0), block.std(axis=0)):
            row[f"{code}_mean"] = float(mean)
            row[f"{code}_std"] = float(std)
        rows.append(row)
    return rows
