"""Root-star sky regions and the Shannon diversity of their figures across clusters."""

import logging
from collections import Counter
from typing import Iterable, Mapping

import numpy as np

from app.core.errors import DataValidationError
from app.models.analysis import SkyRegion
from app.models.skyculture import Dataset

logger = logging.getLogger("skysig.regions")

LOW_DIVERSITY = 0.5


def root_star_regions(dataset: Dataset, min_count: int = 20) -> list[SkyRegion]:
    """
    One region per star that appears in at least ``min_count`` figures of any culture.

    Regions are ordered by member count (largest first), then star id.
    """
    if min_count < 1:
        raise DataValidationError("min_count must be >= 1")
    members: dict[str, list[str]] = {}
    for fig in dataset.figures:
        for star in fig.stars:
            members.setdefault(star, []).append(fig.key)
    regions = [
        SkyRegion(root_star=star, members=tuple(sorted(keys)))
        for star, keys in members.items()
        if len(keys) >= min_count
    ]
    regions.sort(key=lambda r: (-r.member_count, r.root_star))
    logger.info("%d root-star regions with >= %d figures", len(regions), min_count)
    return regions


def cluster_distribution(region: SkyRegion, cluster_labels: Mapping[str, str]) -> Counter:
    unlabeled = [key for key in region.members if key not in cluster_labels]
    if unlabeled:
        raise DataValidationError(
            f"region {region.root_star}: figures without a cluster label: {', '.join(unlabeled)}"
        )
    return Counter(cluster_labels[key] for key in region.members)


def diversity(region: SkyRegion, cluster_labels: Mapping[str, str], k: int) -> float:
    """Shannon entropy of the region's members over ``k`` clusters, divided by ``log k``."""
    if k < 2:
        raise DataValidationError(f"diversity needs k >= 2 clusters, got {k}")
    counts = cluster_distribution(region, cluster_labels)
    if len(counts) > k:
        raise DataValidationError(f"region {region.root_star} spans {len(counts)} clusters but k={k}")
    p = np.array(sorted(counts.values()), dtype=float) / region.member_count
    entropy = -float(np.sum(p * np.log(p)))
    return max(0.0, entropy / np.log(k))


def region_summary(
    regions: list[SkyRegion],
    scores: Mapping[str, float],
    cluster_labels: Mapping[str, str],
    clusters: Iterable[str],
) -> dict:
    """Mean diversity, share of low-diversity regions and per-cluster region presence."""
    values = np.array([scores[r.root_star] for r in regions], dtype=float)
    presence = {c: 0 for c in clusters}
    for region in regions:
        for cluster in cluster_distribution(region, cluster_labels):
            presence[cluster] = presence.get(cluster, 0) + 1
    return {
        "regions": len(regions),
        "mean_h": float(values.mean()) if values.size else 0.0,
        "low_share": float((values < LOW_DIVERSITY).mean()) if values.size else 0.0,
        "presence": dict(sorted(presence.items())),
    }
