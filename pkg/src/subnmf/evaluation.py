"""Clustering of learned representations and the accuracy / NMI scores."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .numerics import as_matrix


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia_history: list[float] = field(default_factory=list)
    rounds: int = 0


@dataclass
class ClusteringReport:
    predicted: np.ndarray
    mapped: np.ndarray
    accuracy: float
    nmi: float
    seed: int | None = None


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # remaining points coincide with centers; pick any unused index
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(free[rng.integers(free.size)])
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _sq_dists(points, centers):
    return (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    ).clip(min=0.0)


def kmeans_fit(points, k: int, rng: np.random.Generator, max_rounds: int = 100) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding on the columns of ``points``.

    Stops when the assignment stops changing or after ``max_rounds``.
    A cluster that empties keeps its previous center.
    """
    pts = as_matrix(points, "points").T  # one row per sample
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    centers = _kmeans_pp(pts, k, rng)
    labels = np.argmin(_sq_dists(pts, centers), axis=1)
    history = []
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = pts[members].mean(axis=0)
        d = _sq_dists(pts, centers)
        history.append(float(d[np.arange(n), labels].sum()))
        new = np.argmin(d, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    history.append(float(np.sum((pts - centers[labels]) ** 2)))
    return KMeansResult(labels=labels, centers=centers, inertia_history=history, rounds=rounds)


def kmeans(points, k: int, rng: np.random.Generator) -> np.ndarray:
    return kmeans_fit(points, k, rng).labels


def _pair(predicted, truth):
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape:
        raise ValueError(f"label length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("labels must be non-empty")
    return p, t


def contingency(predicted, truth) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts table with rows = predicted clusters, columns = true classes."""
    p, t = _pair(predicted, truth)
    pv, pc = np.unique(p, return_inverse=True)
    tv, tc = np.unique(t, return_inverse=True)
    table = np.zeros((pv.size, tv.size), dtype=np.int64)
    np.add.at(table, (pc.ravel(), tc.ravel()), 1)
    return table, pv, tv


def optimal_label_map(predicted, truth) -> dict:
    """Cluster -> class assignment maximizing the number of matched samples.

    Solved as a maximum-weight matching on the contingency table. When
    there are more clusters than classes, the unmatched clusters are left
    out of the map.
    """
    table, pv, tv = contingency(predicted, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return {pv[r].item(): tv[c].item() for r, c in zip(rows, cols)}


def apply_map(predicted, mapping: dict, missing=-1) -> np.ndarray:
    return np.array([mapping.get(v.item(), missing) for v in np.asarray(predicted)])


def accuracy(predicted, truth) -> float:
    p, t = _pair(predicted, truth)
    mapped = apply_map(p, optimal_label_map(p, t))
    return float(np.mean(mapped == t))


def _entropy(counts: np.ndarray, n: int) -> float:
    q = counts[counts > 0] / n
    return float(-np.sum(q * np.log(q)))


def mutual_information(y, y_prime) -> float:
    table, _, _ = contingency(y, y_prime)
    n = table.sum()
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))


def nmi(y, y_prime) -> float:
    """Mutual information over the larger of the two entropies (natural log).

    Two single-class labelings have no information to share; the score is
    defined as 0 in that case.
    """
    table, _, _ = contingency(y, y_prime)
    n = int(table.sum())
    denom = max(_entropy(table.sum(axis=1), n), _entropy(table.sum(axis=0), n))
    if denom <= 0:
        return 0.0
    return float(min(max(mutual_information(y, y_prime) / denom, 0.0), 1.0))


def evaluate_clustering(h, truth, k: int, rng: np.random.Generator, seed: int | None = None) -> ClusteringReport:
    """Cluster the columns of ``h`` with k-means and score against ``truth``."""
    predicted = kmeans(h, k, rng)
    mapped = apply_map(predicted, optimal_label_map(predicted, truth))
    truth = np.asarray(truth)
    return ClusteringReport(
        predicted=predicted,
        mapped=mapped,
        accuracy=float(np.mean(mapped == truth)),
        nmi=nmi(truth, predicted),
        seed=seed,
    )
