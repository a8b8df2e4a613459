import logging
from typing import Mapping

import numpy as np
from sklearn.cluster import KMeans

from app.core.errors import DataValidationError
from app.models.analysis import ClusterAssignment, ClusterSourceKind
from app.models.signature import FeatureMatrix
from app.services.clusters.base import ClusterSource

logger = logging.getLogger("skysig.clusters")

MAX_ITER = 300


def kmeans(matrix: FeatureMatrix, k: int, seed: int = 0, max_iter: int = MAX_ITER) -> ClusterAssignment:
    """
    Lloyd k-means with k-means++ seeding on the standardized signatures.

    Cluster ids are renumbered ``0..k-1`` in order of first appearance along the rows.
    """
    if k < 2 or k > matrix.n:
        raise DataValidationError(f"k must satisfy 2 <= k <= n (k={k}, n={matrix.n})")
    model = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=1,
        max_iter=max_iter,
        tol=0.0,
        algorithm="lloyd",
        random_state=seed,
    )
    raw_labels = model.fit_predict(matrix.standardized)

    renumber: dict[int, int] = {}
    for label in raw_labels:
        renumber.setdefault(int(label), len(renumber))
    labels = {key: str(renumber[int(label)]) for key, label in zip(matrix.keys, raw_labels)}
    logger.info(
        "k-means: k=%d, %d iterations, inertia %.4f, sizes %s",
        k, model.n_iter_, model.inertia_, np.bincount(list(map(int, labels.values())), minlength=k).tolist(),
    )
    return ClusterAssignment(labels=labels, source=ClusterSourceKind.KMEANS, k=k)


class KMeansSource(ClusterSource):
    kind = ClusterSourceKind.KMEANS

    def assign(self, matrix: FeatureMatrix, tendrils: Mapping[str, int]) -> ClusterAssignment:
        return kmeans(matrix, self.config.kmeans_k, self.config.seed)
