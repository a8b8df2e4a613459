"""
Directed nearest-neighbour network of figures and the assortativity analysis
run on it: mixing matrix, normalised r with jackknife error, one-vs-others
and pairwise similarity between classes.
"""

import logging
from itertools import combinations
from typing import Mapping, Optional, Union

import networkx as nx
import numpy as np
from scipy.spatial.distance import cdist

from app.core.errors import DataValidationError, NumericalFailure
from app.models.analysis import AssortativityResult, KnnGraph, MixingMatrix
from app.models.signature import FeatureMatrix

logger = logging.getLogger("skysig.mixing")

OTHER = "(other)"
SINGLE_LABEL_TOL = 1e-12


def default_p(n_figures: int, n_cultures: int) -> int:
    """Average culture size, rounded: the outdegree used when ``knn_p = auto``."""
    if n_cultures < 1:
        raise DataValidationError("need at least one culture")
    return max(1, int(np.floor(n_figures / n_cultures + 0.5)))


def knn_graph(
    features: Union[FeatureMatrix, np.ndarray],
    p: int,
    nodes: Optional[tuple[str, ...]] = None,
) -> KnnGraph:
    """
    Link every row to its ``p`` nearest rows by squared Euclidean distance.

    Ties go to the lower row index.
    """
    if isinstance(features, FeatureMatrix):
        X = features.standardized
        nodes = features.keys
    else:
        X = np.asarray(features, dtype=float)
        nodes = nodes or tuple(str(i) for i in range(len(X)))
    n = len(X)
    if p < 1 or p >= n:
        raise DataValidationError(f"outdegree p must satisfy 1 <= p < n (p={p}, n={n})")
    dist = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    out_edges = np.argsort(dist, axis=1, kind="stable")[:, :p]
    logger.info("kNN graph: %d nodes, outdegree %d", n, p)
    return KnnGraph(nodes=tuple(nodes), out_edges=out_edges)


def _encode(g: KnnGraph, labels: Mapping[str, str]) -> tuple[tuple[str, ...], np.ndarray]:
    missing = [node for node in g.nodes if node not in labels]
    if missing:
        raise DataValidationError(f"{len(missing)} nodes have no label, e.g. {missing[0]!r}")
    classes = tuple(sorted({labels[node] for node in g.nodes}))
    index = {c: i for i, c in enumerate(classes)}
    return classes, np.array([index[labels[node]] for node in g.nodes], dtype=int)


def _edge_counts(g: KnnGraph, codes: np.ndarray, n_classes: int) -> np.ndarray:
    sources, targets = g.edge_list()
    counts = np.zeros((n_classes, n_classes))
    np.add.at(counts, (codes[sources], codes[targets]), 1.0)
    return counts


def r_from_mixing(e: np.ndarray) -> float:
    """``(tr e - sum a_i b_i) / (1 - sum a_i b_i)`` for a mixing matrix summing to 1."""
    ab = float(e.sum(axis=1) @ e.sum(axis=0))
    if ab >= 1.0 - SINGLE_LABEL_TOL:
        raise NumericalFailure("assortativity undefined for a single label")
    return (float(np.trace(e)) - ab) / (1.0 - ab)


def mixing_matrix(g: KnnGraph, labels: Mapping[str, str]) -> MixingMatrix:
    classes, codes = _encode(g, labels)
    counts = _edge_counts(g, codes, len(classes))
    return MixingMatrix(classes=classes, e=counts / counts.sum())


def r_max(class_sizes: np.ndarray, p: int) -> float:
    """
    r of the best-case mixing matrix: each class keeps ``min(p, n_c - 1) / p``
    of its outlinks and spreads the rest over the other classes in proportion
    to their sizes.
    """
    sizes = np.asarray(class_sizes, dtype=float)
    n = sizes.sum()
    share = sizes / n
    e = np.zeros((len(sizes), len(sizes)))
    for c, n_c in enumerate(sizes):
        intra = min(p, n_c - 1) / p
        e[c, c] = share[c] * intra
        others = np.delete(np.arange(len(sizes)), c)
        rest = sizes[others]
        if rest.sum() > 0:
            e[c, others] = share[c] * (1.0 - intra) * rest / rest.sum()
    value = r_from_mixing(e)
    if value <= 0:
        raise NumericalFailure(f"maximum assortativity {value:.6f} is not positive")
    return value


def _jackknife_sigma(counts: np.ndarray, r: float, norm: float) -> float:
    """
    Error from removing each edge once. Edges with the same (source, target)
    label pair give the same recomputed r, so each pair is evaluated once.
    """
    m = counts.sum()
    A = counts.sum(axis=1)
    B = counts.sum(axis=0)
    trace = np.trace(counts)
    ab = float(A @ B)
    total = 0.0
    for s, t in zip(*np.nonzero(counts)):
        same = 1.0 if s == t else 0.0
        m_k = m - 1.0
        tr_k = (trace - same) / m_k
        ab_k = (ab - B[s] - A[t] + same) / (m_k * m_k)
        if ab_k >= 1.0 - SINGLE_LABEL_TOL:
            logger.warning("jackknife: removing a %d->%d edge leaves a single label; skipped", s, t)
            continue
        r_k = (tr_k - ab_k) / (1.0 - ab_k) / norm
        total += counts[s, t] * (r_k - r) ** 2
    return float(np.sqrt(total))


def assortativity(g: KnnGraph, labels: Mapping[str, str]) -> AssortativityResult:
    """
    Assortativity of ``labels`` on the kNN graph.

    ``r`` is ``r_raw / r_max``; ``sigma_r`` is the single-edge jackknife error
    on the same normalised scale.

    Raises:
        NumericalFailure: fewer than two labels present.
    """
    classes, codes = _encode(g, labels)
    if len(classes) < 2:
        raise NumericalFailure(f"assortativity undefined for a single label ({classes[0]!r})")
    counts = _edge_counts(g, codes, len(classes))
    r_raw = r_from_mixing(counts / counts.sum())
    best = r_max(np.bincount(codes, minlength=len(classes)), g.p)
    r = r_raw / best
    sigma = _jackknife_sigma(counts, r, best)
    return AssortativityResult(r_raw=r_raw, r_max=best, r=r, sigma_r=sigma)


def _r_value(g: KnnGraph, labels: Mapping[str, str], normalized: bool) -> float:
    classes, codes = _encode(g, labels)
    if len(classes) < 2:
        # every edge is intra-class
        return 1.0
    counts = _edge_counts(g, codes, len(classes))
    r_raw = r_from_mixing(counts / counts.sum())
    if not normalized:
        return r_raw
    return r_raw / r_max(np.bincount(codes, minlength=len(classes)), g.p)


def _require(labels: Mapping[str, str], *classes: str) -> None:
    present = set(labels.values())
    for c in classes:
        if c not in present:
            raise DataValidationError(f"label {c!r} not present")


def one_vs_others(g: KnnGraph, labels: Mapping[str, str], focus: str) -> AssortativityResult:
    """Assortativity of ``focus`` against every other label taken as one group."""
    _require(labels, focus)
    binary = {node: focus if labels[node] == focus else OTHER for node in g.nodes}
    return assortativity(g, binary)


def one_vs_others_all(
    g: KnnGraph,
    labels: Mapping[str, str],
    skip_failures: bool = False,
) -> dict[str, AssortativityResult]:
    """
    ``one_vs_others`` for every label present, in label order.

    With ``skip_failures`` a label whose relabelled graph has no defined r is
    logged and left out instead of aborting the whole table.
    """
    present = sorted({labels[node] for node in g.nodes})
    if len(present) < 2:
        raise NumericalFailure("one-vs-others needs at least two labels")
    results: dict[str, AssortativityResult] = {}
    for label in present:
        try:
            results[label] = one_vs_others(g, labels, label)
        except NumericalFailure as exc:
            if not skip_failures:
                raise
            logger.warning("[ASSORT] %s vs others skipped: %s", label, exc)
    return results


def similarity_delta(
    g: KnnGraph,
    labels: Mapping[str, str],
    c1: str,
    c2: str,
    normalized: bool = True,
) -> float:
    """
    ``r_merged - r`` on the {c1, c2, other} relabelling. Positive when the two
    classes resemble each other more than they resemble the rest.

    If c1 and c2 cover every node, the merged graph has a single label and its
    r is taken as 1.
    """
    if c1 == c2:
        raise DataValidationError("similarity needs two distinct classes")
    _require(labels, c1, c2)
    split = {node: labels[node] if labels[node] in (c1, c2) else OTHER for node in g.nodes}
    merged_name = f"{c1}+{c2}"
    merged = {node: merged_name if split[node] != OTHER else OTHER for node in g.nodes}
    return _r_value(g, merged, normalized) - _r_value(g, split, normalized)


def similarity_matrix(
    g: KnnGraph, labels: Mapping[str, str], normalized: bool = True
) -> tuple[tuple[str, ...], np.ndarray]:
    """Symmetric matrix of pairwise similarity; the diagonal is 0."""
    classes = tuple(sorted({labels[node] for node in g.nodes}))
    delta = np.zeros((len(classes), len(classes)))
    for i, j in combinations(range(len(classes)), 2):
        value = similarity_delta(g, labels, classes[i], classes[j], normalized)
        delta[i, j] = delta[j, i] = value
    return classes, delta


def auto_threshold(delta: np.ndarray) -> float:
    """Median of the positive off-diagonal similarities (0 when none is positive)."""
    upper = delta[np.triu_indices(len(delta), k=1)]
    positive = upper[upper > 0]
    return float(np.median(positive)) if positive.size else 0.0


def similarity_graph(
    g: KnnGraph,
    labels: Mapping[str, str],
    threshold: Union[float, str] = 0.0,
    normalized: bool = True,
    matrix: Optional[tuple[tuple[str, ...], np.ndarray]] = None,
) -> nx.Graph:
    """
    One node per class (attribute ``size``: figure count) and an edge weighted
    by the similarity wherever it exceeds ``threshold`` (a number or ``"auto"``).
    """
    classes, delta = matrix if matrix is not None else similarity_matrix(g, labels, normalized)
    if len(classes) < 2:
        raise NumericalFailure("similarity graph needs at least two labels")
    if threshold == "auto":
        threshold = auto_threshold(delta)
        logger.info("Similarity threshold (auto): %.6f", threshold)
    threshold = float(threshold)

    sizes: dict[str, int] = {}
    for node in g.nodes:
        sizes[labels[node]] = sizes.get(labels[node], 0) + 1
    graph = nx.Graph(threshold=threshold)
    for c in classes:
        graph.add_node(c, size=sizes[c])
    for i, j in combinations(range(len(classes)), 2):
        if delta[i, j] > threshold:
            graph.add_edge(classes[i], classes[j], weight=float(delta[i, j]))
    logger.info("Similarity graph: %d classes, %d links", graph.number_of_nodes(), graph.number_of_edges())
    return graph
