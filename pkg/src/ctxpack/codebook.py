"""History discretization through a fitted latent-pixel codebook.

A codebook is fit with Lloyd's algorithm over every pixel vector of a
latent-video dataset, seeded deterministically with the D-squared
(k-means++) scheme. Quantization assigns each pixel its nearest centroid
by Euclidean distance (ties to the lowest index); dequantization maps
indices back to centroid rows. Discretizing history is the round trip and
is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ChannelMismatch, IndexOutOfRange, InsufficientData
from .packing import LatentVideo

DEFAULT_K = 128
_CHUNK = 1 << 14


@dataclass(frozen=True)
class FitStats:
    inertia: float
    iterations: int
    seed: int
    inertia_trace: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Codebook:
    centroids: np.ndarray  # (K, C)
    fit_stats: FitStats | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.centroids, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"centroids must be a (K, C) matrix, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("centroids must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "centroids", arr)

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def channels(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True, eq=False)
class IndexMap:
    """Per-pixel codebook indices over a (T, H, W) grid."""

    indices: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.indices)
        if arr.ndim != 3 or not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("index map must be a 3D integer grid")
        object.__setattr__(self, "indices", arr)


def _nearest(pixels: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid index and squared distance per pixel, chunked."""
    n = pixels.shape[0]
    assign = np.empty(n, dtype=np.int64)
    d2 = np.empty(n, dtype=np.float64)
    for lo in range(0, n, _CHUNK):
        chunk = pixels[lo : lo + _CHUNK]
        dist = ((chunk[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
        assign[lo : lo + _CHUNK] = dist.argmin(axis=1)
        d2[lo : lo + _CHUNK] = dist[np.arange(chunk.shape[0]), assign[lo : lo + _CHUNK]]
    return assign, d2


def _dsquared_seed(pixels: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ initial centroids: D-squared sampling from the pixels."""
    n = pixels.shape[0]
    centroids = np.empty((k, pixels.shape[1]), dtype=np.float64)
    centroids[0] = pixels[rng.integers(n)]
    d2 = ((pixels - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total == 0:
            centroids[j] = pixels[rng.integers(n)]
            continue
        idx = rng.choice(n, p=d2 / total)
        centroids[j] = pixels[idx]
        d2 = np.minimum(d2, ((pixels - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _pixel_matrix(dataset: Sequence[LatentVideo]) -> np.ndarray:
    if not dataset:
        raise InsufficientData("dataset is empty")
    channels = dataset[0].channels
    if any(v.channels != channels for v in dataset):
        raise ChannelMismatch("dataset videos have mixed channel counts")
    return np.concatenate([v.data.reshape(-1, channels) for v in dataset])


def fit_codebook(
    dataset: Sequence[LatentVideo],
    k: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> Codebook:
    """Fit a k-entry codebook over all latent pixels of the dataset.

    Deterministic for a fixed seed. Iterates until the relative inertia
    improvement drops below ``tol`` or ``max_iters`` assignment passes run.
    Empty clusters are re-seeded to the point farthest from its centroid.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pixels = _pixel_matrix(dataset)
    if np.unique(pixels, axis=0).shape[0] < k:
        raise InsufficientData(
            f"need at least {k} distinct pixels to fit {k} codebook entries"
        )

    rng = np.random.default_rng(seed)
    centroids = _dsquared_seed(pixels, k, rng)

    trace: list[float] = []
    for _ in range(max_iters):
        assign, d2 = _nearest(pixels, centroids)
        counts = np.bincount(assign, minlength=k)
        for j in np.flatnonzero(counts == 0):
            far = int(d2.argmax())
            centroids[j] = pixels[far]
            assign[far] = j
            d2[far] = 0.0
            counts = np.bincount(assign, minlength=k)
        inertia = float(d2.sum())
        trace.append(inertia)
        if len(trace) > 1:
            prev = trace[-2]
            if prev == 0 or (prev - inertia) <= tol * prev:
                break
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, pixels)
        centroids = sums / counts[:, None]

    stats = FitStats(trace[-1], len(trace), seed, tuple(trace))
    return Codebook(centroids, stats)


def quantize(frames: LatentVideo, codebook: Codebook) -> IndexMap:
    """Nearest-centroid index per pixel; ties break to the lowest index."""
    if frames.channels != codebook.channels:
        raise ChannelMismatch(
            f"video has {frames.channels} channels, codebook has {codebook.channels}"
        )
    pixels = frames.data.reshape(-1, frames.channels)
    assign, _ = _nearest(pixels, codebook.centroids)
    return IndexMap(assign.reshape(frames.data.shape[:3]))


def dequantize(index_map: IndexMap, codebook: Codebook) -> LatentVideo:
    """Replace each index with its codebook row."""
    idx = index_map.indices
    if idx.size and (idx.min() < 0 or idx.max() >= codebook.size):
        raise IndexOutOfRange(
            f"index map values must lie in [0, {codebook.size - 1}]"
        )
    return LatentVideo(codebook.centroids[idx])


def discretize_history(frames: LatentVideo, codebook: Codebook) -> LatentVideo:
    """Snap every pixel to its nearest codebook entry. Idempotent."""
    return dequantize(quantize(frames, codebook), codebook)
