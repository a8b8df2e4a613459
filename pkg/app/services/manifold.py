"""
Exact t-SNE embedding of the standardized feature matrix, PCA initialisation
and the trustworthiness score used to judge the embedding.
"""

import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from app.core.errors import DataValidationError, NumericalFailure
from app.models.analysis import Embedding, TsneParams

logger = logging.getLogger("skysig.manifold")

PROB_FLOOR = 1e-12
ENTROPY_TOL = 1e-5
MAX_BISECTIONS = 100
INIT_STD = 1e-4
MIN_GAIN = 0.01
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
LOG_EVERY = 1000


def pca_project(X: np.ndarray, d: int) -> np.ndarray:
    """
    Project ``X`` onto its top ``d`` principal components.

    Each component is signed so that its largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    n, dims = X.shape
    if d > min(n, dims):
        raise DataValidationError(f"cannot project {n}x{dims} data onto {d} components")
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / max(n - 1, 1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(-values, kind="stable")[:d]
    components = vectors[:, order]
    for col in range(d):
        pivot = np.argmax(np.abs(components[:, col]))
        if components[pivot, col] < 0:
            components[:, col] = -components[:, col]
    return centered @ components


def _row_entropy(distances: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    shifted = distances - distances.min()
    weights = np.exp(-shifted * beta)
    total = weights.sum()
    probs = weights / total
    entropy = float(np.log(total) + beta * np.dot(shifted, weights) / total)
    return probs, entropy


def perplexity_calibration(
    distances: np.ndarray,
    perplexity: float,
    strict: bool = False,
) -> np.ndarray:
    """
    Conditional probabilities ``p_{j|i}`` for one row of squared distances.

    The row must not contain the self-distance. The Gaussian precision is found
    by bisection until the entropy equals ``log(perplexity)`` within 1e-5.
    A row that does not converge in 100 steps is logged (or raised when ``strict``).
    """
    distances = np.asarray(distances, dtype=float)
    target = np.log(perplexity)
    beta, beta_min, beta_max = 1.0, -np.inf, np.inf
    probs, entropy = _row_entropy(distances, beta)
    for _ in range(MAX_BISECTIONS):
        if abs(entropy - target) < ENTROPY_TOL:
            return probs
        if entropy > target:
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        probs, entropy = _row_entropy(distances, beta)

    if abs(entropy - target) < ENTROPY_TOL:
        return probs
    message = (
        f"perplexity calibration did not converge: entropy {entropy:.6f}, "
        f"target {target:.6f}"
    )
    if strict:
        raise NumericalFailure(message)
    logger.warning(message)
    return probs


def _floor_and_normalize(P: np.ndarray) -> np.ndarray:
    off = ~np.eye(len(P), dtype=bool)
    P = P.copy()
    while True:
        low = off & (P < PROB_FLOOR)
        P[low] = PROB_FLOOR
        rest = off & ~low
        scale = (1.0 - low.sum() * PROB_FLOOR) / P[rest].sum()
        P[rest] *= scale
        if not (off & (P < PROB_FLOOR)).any():
            break
    np.fill_diagonal(P, 0.0)
    return P


def joint_probabilities(X: np.ndarray, perplexity: float, strict: bool = False) -> np.ndarray:
    """Symmetrized affinities ``(p_{j|i} + p_{i|j}) / 2n``, floored at 1e-12, summing to 1."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    sq = cdist(X, X, "sqeuclidean")
    conditional = np.zeros((n, n))
    for i in range(n):
        mask = np.arange(n) != i
        conditional[i, mask] = perplexity_calibration(sq[i, mask], perplexity, strict)
    P = (conditional + conditional.T) / (2.0 * n)
    return _floor_and_normalize(P)


def _student_kernel(Y: np.ndarray) -> np.ndarray:
    num = 1.0 / (1.0 + cdist(Y, Y, "sqeuclidean"))
    np.fill_diagonal(num, 0.0)
    return num


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    """KL(P || Q) with Q the Student-t affinities of ``Y``."""
    num = _student_kernel(Y)
    Q = np.maximum(num / num.sum(), np.finfo(float).tiny)
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne_gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact gradient of ``kl_divergence`` with respect to ``Y``."""
    num = _student_kernel(Y)
    Q = num / num.sum()
    W = (P - Q) * num
    return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)


def _initial_layout(X: np.ndarray, dims: int) -> np.ndarray:
    init = pca_project(X, dims)
    spread = init[:, 0].std()
    if spread == 0:
        return np.zeros_like(init)
    return init / spread * INIT_STD


def _optimize(P: np.ndarray, Y: np.ndarray, params: TsneParams, restart: int) -> Optional[np.ndarray]:
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    for it in range(params.iterations):
        early = it < params.exaggeration_iterations
        momentum = MOMENTUM_EARLY if early else MOMENTUM_LATE
        grad = tsne_gradient(P * params.early_exaggeration if early else P, Y)

        same_sign = (update * grad) > 0
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        update = momentum * update - params.learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)

        if not np.isfinite(Y).all():
            logger.warning("t-SNE restart %d diverged at iteration %d; aborted", restart, it)
            return None
        if (it + 1) % LOG_EVERY == 0:
            logger.debug("t-SNE restart %d iteration %d KL %.6f", restart, it + 1, kl_divergence(P, Y))
    return Y


def tsne(X: np.ndarray, params: TsneParams, strict: bool = False) -> Embedding:
    """
    Embed the rows of ``X`` with exact t-SNE and keep the best of ``params.restarts`` runs.

    Restart 0 starts from the scaled PCA layout; later restarts add seeded
    jitter of the same scale.

    Raises:
        NumericalFailure: every restart produced non-finite coordinates.
    """
    X = np.asarray(X, dtype=float)
    params.check_sample_size(len(X))
    P = joint_probabilities(X, params.perplexity, strict)
    init = _initial_layout(X, params.dims)

    best: Optional[np.ndarray] = None
    best_kl = np.inf
    kls: list[float] = []
    failed: list[int] = []
    for restart in range(params.restarts):
        start = init
        if restart > 0:
            rng = np.random.default_rng([params.seed, restart])
            start = init + rng.normal(scale=INIT_STD, size=init.shape)
        coords = _optimize(P, start.copy(), params, restart)
        if coords is None:
            failed.append(restart)
            kls.append(float("nan"))
            continue
        kl = kl_divergence(P, coords)
        kls.append(kl)
        logger.info("t-SNE restart %d finished: KL %.6f", restart, kl)
        if kl < best_kl:
            best, best_kl = coords, kl

    if best is None:
        raise NumericalFailure(f"t-SNE failed on all {params.restarts} restarts")
    return Embedding(
        coords=best,
        kl_final=float(best_kl),
        params=params,
        seed_used=params.seed,
        kl_per_restart=tuple(kls),
        failed_restarts=tuple(failed),
    )


def _ranks(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dist = cdist(X, X, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(len(X))[:, None]
    ranks[rows, order] = np.arange(1, len(X) + 1)
    return order, ranks


def trustworthiness(X: np.ndarray, Y: np.ndarray, k: int) -> float:
    """
    Share of embedded k-neighbourhoods that were also neighbours in ``X``,
    penalised by their original rank. 1.0 means every neighbourhood is kept.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = len(X)
    if len(Y) != n:
        raise DataValidationError(f"row count mismatch: {n} vs {len(Y)}")
    if k < 1 or k >= n / 2:
        raise DataValidationError(f"k must satisfy 1 <= k < n/2 (k={k}, n={n})")
    _, ranks_x = _ranks(X)
    order_y, _ = _ranks(Y)
    rows = np.arange(n)[:, None]
    penalty = np.maximum(ranks_x[rows, order_y[:, :k]] - k, 0).sum()
    return float(1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty)
