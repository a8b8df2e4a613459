import logging

import networkx as nx
import numpy as np

logger = logging.getLogger("skysig.plots")

LAYOUT_ITERATIONS = 500


def force_layout(graph: nx.Graph, seed: int = 0, iterations: int = LAYOUT_ITERATIONS) -> dict[str, tuple[float, float]]:
    """
    Deterministic force-directed positions in [-1, 1]^2.

    Edge ``weight`` pulls nodes together; a fixed seed and node order give the
    same layout on every run.
    """
    if graph.number_of_nodes() == 0:
        return {}
    if graph.number_of_nodes() == 1:
        return {next(iter(graph.nodes)): (0.0, 0.0)}
    pos = nx.spring_layout(graph, weight="weight", seed=seed, iterations=iterations)
    return {node: (float(np.round(xy[0], 9)), float(np.round(xy[1], 9))) for node, xy in pos.items()}
