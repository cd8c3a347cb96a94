"""K-means clustering of document embeddings.

Lloyd's algorithm with k-means++ initialization under a fixed seed. Empty
clusters are repaired after each assignment step by stealing the farthest
point of the largest cluster; ties break on the lowest index so a given
(corpus, k, seed) triple always produces the same partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .embedding import DEFAULT_DIMS, embed_text
from .errors import KTooLarge

MAX_ITERATIONS = 100
SHIFT_TOLERANCE = 1e-6


@dataclass
class Clustering:
    k: int
    assignments: dict[str, int]
    centroids: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    # Iteration indices where empty-cluster repair ran; inertia may rise
    # within those iterations (the repair deliberately un-optimizes one point).
    repair_iterations: list[int] = field(default_factory=list)

    def members(self, idx: int) -> list[str]:
        return [d for d, c in self.assignments.items() if c == idx]

    def sizes(self) -> list[int]:
        counts = [0] * self.k
        for c in self.assignments.values():
            counts[c] += 1
        return counts


def default_k(n_docs: int) -> int:
    """Heuristic cluster count: ceil(sqrt(N/2)) clamped to [2, 32]."""
    if n_docs <= 1:
        return 1
    return max(2, min(32, math.ceil(math.sqrt(n_docs / 2))))


def embed_corpus(corpus: Corpus, dims: int = DEFAULT_DIMS) -> np.ndarray:
    return np.stack([embed_text(doc.text, dims).values for doc in corpus])


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            # Remaining points coincide with chosen centroids; take unused
            # indices in order so init still yields k distinct slots.
            for i in range(n):
                if i not in chosen:
                    chosen.append(i)
                    if len(chosen) == k:
                        break
            break
        probs = d2 / total
        nxt = int(rng.choice(n, p=probs))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen].copy()


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Squared Euclidean distances, ties to the lowest cluster index (argmin).
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(points.shape[0]), labels]


def _repair_empty(labels: np.ndarray, dists: np.ndarray, k: int) -> tuple[np.ndarray, bool]:
    labels = labels.copy()
    repaired = False
    for cluster in range(k):
        if (labels == cluster).any():
            continue
        sizes = np.bincount(labels, minlength=k)
        donor = int(sizes.argmax())
        donor_idx = np.where(labels == donor)[0]
        farthest = donor_idx[int(dists[donor_idx].argmax())]
        labels[farthest] = cluster
        repaired = True
    return labels, repaired


def cluster_corpus(
    corpus: Corpus,
    k: int,
    seed: int,
    dims: int = DEFAULT_DIMS,
) -> Clustering:
    """Cluster corpus embeddings into ``k`` groups."""
    n = len(corpus)
    if n == 0:
        raise ValueError("corpus is empty")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise KTooLarge(k, n)

    points = embed_corpus(corpus, dims)
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)

    history: list[float] = []
    repairs: list[int] = []
    labels = np.zeros(n, dtype=int)
    for it in range(MAX_ITERATIONS):
        labels, dists = _assign(points, centroids)
        labels, repaired = _repair_empty(labels, dists, k)
        if repaired:
            repairs.append(it)
        # Inertia against the centroids the assignment was made with.
        inertia = float(((points - centroids[labels]) ** 2).sum())
        history.append(inertia)
        new_centroids = centroids.copy()
        for cluster in range(k):
            mask = labels == cluster
            if mask.any():
                new_centroids[cluster] = points[mask].mean(axis=0)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < SHIFT_TOLERANCE:
            break

    labels, dists = _assign(points, centroids)
    labels, repaired = _repair_empty(labels, dists, k)
    if repaired:
        repairs.append(MAX_ITERATIONS)
    final_inertia = float(((points - centroids[labels]) ** 2).sum())
    history.append(final_inertia)

    assignments = {doc_id: int(lab) for doc_id, lab in zip(corpus.doc_ids, labels)}
    return Clustering(
        k=k,
        assignments=assignments,
        centroids=centroids,
        inertia=final_inertia,
        inertia_history=history,
        repair_iterations=repairs,
    )


def clustering_to_json(clustering: Clustering) -> dict:
    return {
        "k": clustering.k,
        "assignments": dict(sorted(clustering.assignments.items())),
        "inertia": clustering.inertia,
    }
