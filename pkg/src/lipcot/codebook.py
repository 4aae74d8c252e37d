"""Token vocabulary over a latent space: normalization, k-means, inversion.

Training z-scores the latent vectors, clusters them with seeded k-means++,
and freezes the normalization statistics alongside the centroids so that
encoding and decoding see exactly the space the vocabulary was built in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._util import write_text_atomic
from .errors import (
    DimensionMismatchError,
    InvalidTokenError,
    TooFewVectorsError,
)
from .latent import LatentMethod, LatentVector, latent_to_model
from .lpc_core import LpcModel

CODEBOOK_FORMAT_VERSION = "1"

RESERVED_WORDS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")

_KMEANS_MAX_ITER = 300
_KMEANS_TOL = 1e-6


@dataclass(frozen=True)
class NormStats:
    """Per-dimension z-score statistics fit on the training vectors."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be matching one-dimensional arrays")
        if np.any(std <= 0):
            raise ValueError("std entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "NormStats":
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)  # degenerate dimensions pass through
        return cls(mean, std)

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return values * self.std + self.mean


@dataclass(frozen=True)
class Codebook:
    """K centroids in normalized latent space plus the model configuration."""

    k: int
    centroids: np.ndarray
    norm_stats: NormStats
    method: LatentMethod
    order: int
    lam: float
    seed: int
    version: str = CODEBOOK_FORMAT_VERSION

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=float)
        if centroids.shape != (self.k, self.norm_stats.mean.size):
            raise ValueError("centroid matrix shape disagrees with k and stats")
        if not np.all(np.isfinite(centroids)):
            raise ValueError("centroids must be finite")
        object.__setattr__(self, "centroids", centroids)

    @property
    def dimension(self) -> int:
        return self.centroids.shape[1]


def _pairwise_sq_dist(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # direct differences keep exactly symmetric ties exact
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total > 0.0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centroids[i] = points[idx]
        closest = np.minimum(closest, ((points - points[idx]) ** 2).sum(axis=1))
    return centroids


def _reseed_empty(points, centroids, labels, sq_dists):
    """Move each empty centroid onto the point farthest from its own centroid."""
    taken = set()
    for c in range(centroids.shape[0]):
        if np.any(labels == c):
            continue
        assigned = sq_dists[np.arange(points.shape[0]), labels].copy()
        if taken:
            assigned[list(taken)] = -1.0
        far = int(np.argmax(assigned))
        centroids[c] = points[far]
        labels[far] = c
        taken.add(far)
    return centroids, labels


def kmeans_fit(points: np.ndarray, k: int, seed: int):
    """Seeded k-means++ plus Lloyd iterations on normalized vectors.

    Stops when the largest centroid displacement drops below 1e-6 or after
    300 iterations. Empty clusters are reseeded to the point farthest from
    its current centroid, so the recorded per-iteration inertia never
    increases.

    Returns ``(centroids, labels, inertia_history)``.
    """
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(points, k, rng)
    inertia_history = []
    for _ in range(_KMEANS_MAX_ITER):
        sq_dists = _pairwise_sq_dist(points, centroids)
        labels = np.argmin(sq_dists, axis=1)
        centroids, labels = _reseed_empty(points, centroids, labels, sq_dists)
        inertia_history.append(float(((points - centroids[labels]) ** 2).sum()))
        new_centroids = np.stack(
            [points[labels == c].mean(axis=0) for c in range(k)]
        )
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < _KMEANS_TOL:
            break
    # final assignment against the final centroids; patch any stragglers
    sq_dists = _pairwise_sq_dist(points, centroids)
    labels = np.argmin(sq_dists, axis=1)
    for _ in range(k):
        if all(np.any(labels == c) for c in range(k)):
            break
        centroids, labels = _reseed_empty(points, centroids, labels, sq_dists)
        sq_dists = _pairwise_sq_dist(points, centroids)
        labels = np.argmin(sq_dists, axis=1)
    return centroids, labels, np.asarray(inertia_history)


def train_codebook(
    vectors, k: int, seed: int, *, order: int, lam: float
) -> Codebook:
    """Cluster latent vectors into a K-token vocabulary.

    Normalization statistics are fit on the training vectors and stored in
    the codebook; the same statistics are reused verbatim when encoding and
    decoding. Deterministic for a fixed seed and input order.
    """
    vectors = list(vectors)
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(vectors) < k:
        raise TooFewVectorsError(f"need at least {k} vectors, got {len(vectors)}")
    method = vectors[0].method
    dim = vectors[0].dimension
    for vec in vectors:
        if vec.method.tag != method.tag or vec.dimension != dim:
            raise DimensionMismatchError("training vectors disagree in method or dimension")
    matrix = np.stack([vec.values for vec in vectors])
    if np.unique(matrix, axis=0).shape[0] < k:
        raise TooFewVectorsError(f"need at least {k} distinct vectors")
    stats = NormStats.fit(matrix)
    normalized = stats.normalize(matrix)
    centroids, _, _ = kmeans_fit(normalized, k, seed)
    return Codebook(
        k=k,
        centroids=centroids,
        norm_stats=stats,
        method=method,
        order=int(order),
        lam=float(lam),
        seed=int(seed),
    )


def encode_vector(codebook: Codebook, vec: LatentVector) -> int:
    """Nearest-centroid token id in normalized space; ties go to the lowest id."""
    if vec.method.tag != codebook.method.tag or vec.dimension != codebook.dimension:
        raise DimensionMismatchError("vector does not live in the codebook's space")
    z = codebook.norm_stats.normalize(vec.values)
    sq_dists = ((codebook.centroids - z) ** 2).sum(axis=1)
    return int(np.argmin(sq_dists))


def decode_token(codebook: Codebook, token: int, sample_rate: float) -> LpcModel:
    """Invert a token to the LPC model at its denormalized cluster center."""
    token = int(token)
    if not 0 <= token < codebook.k:
        raise InvalidTokenError(f"token {token} outside [0, {codebook.k})")
    values = codebook.norm_stats.denormalize(codebook.centroids[token])
    vec = LatentVector(codebook.method, values)
    return latent_to_model(vec, codebook.order, codebook.lam, sample_rate)


def export_vocabulary(codebook: Codebook) -> list:
    """Reserved words followed by one word per token id."""
    return list(RESERVED_WORDS) + [f"t{i}" for i in range(codebook.k)]


def codebook_to_dict(codebook: Codebook) -> dict:
    return {
        "version": codebook.version,
        "method": codebook.method.to_dict(),
        "order": codebook.order,
        "lambda": codebook.lam,
        "k": codebook.k,
        "norm_mean": codebook.norm_stats.mean.tolist(),
        "norm_std": codebook.norm_stats.std.tolist(),
        "centroids": codebook.centroids.tolist(),
        "seed": codebook.seed,
    }


def codebook_from_dict(payload: dict) -> Codebook:
    return Codebook(
        k=int(payload["k"]),
        centroids=np.asarray(payload["centroids"], dtype=float),
        norm_stats=NormStats(
            np.asarray(payload["norm_mean"], dtype=float),
            np.asarray(payload["norm_std"], dtype=float),
        ),
        method=LatentMethod.from_dict(payload["method"]),
        order=int(payload["order"]),
        lam=float(payload["lambda"]),
        seed=int(payload["seed"]),
        version=str(payload["version"]),
    )


def save_codebook(codebook: Codebook, path) -> None:
    write_text_atomic(path, json.dumps(codebook_to_dict(codebook), indent=2) + "\n")


def load_codebook(path) -> Codebook:
    with open(path) as fh:
        return codebook_from_dict(json.load(fh))
