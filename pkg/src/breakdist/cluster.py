"""Spectral and agglomerative clustering on distance matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, NumericalError
from .matrix import DistanceMatrix

LINKAGES = ("average", "single", "complete")


@dataclass
class AffinityMatrix:
    """Similarities in [0,1] derived from a distance matrix."""

    values: np.ndarray
    source: str = ""


@dataclass
class LaplacianMatrix:
    """Unnormalized graph Laplacian L = E - A with degree matrix E."""

    values: np.ndarray


@dataclass
class ClusterAssignment:
    """Cluster index in 1..k for each series."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1 or lab.size == 0:
            raise DataError("cluster labels must be a non-empty 1-d sequence")
        present = set(lab.tolist())
        if present != set(range(1, self.k + 1)):
            raise DataError(f"labels must cover 1..{self.k} with no empty cluster")
        self.labels = lab

    def groups(self) -> list[list[int]]:
        return [np.flatnonzero(self.labels == c).tolist() for c in range(1, self.k + 1)]


def to_affinity(D: DistanceMatrix) -> AffinityMatrix:
    """A = 1 - D/max(D), with unit diagonal."""
    maxd = float(D.values.max())
    if maxd <= 0.0:
        raise DataError("degenerate collection: all sets identical")
    a = 1.0 - D.values / maxd
    np.fill_diagonal(a, 1.0)
    label = D.metric.label if D.metric is not None else ""
    return AffinityMatrix(a, source=label)


def laplacian(A: AffinityMatrix) -> LaplacianMatrix:
    """L = E - A where E is the diagonal of row sums of A."""
    a = np.asarray(A.values, dtype=np.float64)
    lap = np.diag(a.sum(axis=1)) - a
    if float(np.linalg.eigvalsh(lap)[0]) < -1e-9:
        raise NumericalError("Laplacian is not positive semi-definite")
    return LaplacianMatrix(lap)


def _canonical(raw: np.ndarray) -> np.ndarray:
    """Renumber labels to 1..k in order of first occurrence."""
    mapping: dict[int, int] = {}
    out = np.empty(raw.size, dtype=np.int64)
    for i, r in enumerate(raw.tolist()):
        if r not in mapping:
            mapping[r] = len(mapping) + 1
        out[i] = mapping[r]
    return out


def _kmeans_once(points: np.ndarray, k: int, rng: np.random.Generator,
                 max_iter: int, tol: float):
    n = points.shape[0]
    # k-means++ seeding
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    sqd = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = sqd.sum()
        if total > 0:
            centers[c] = points[rng.choice(n, p=sqd / total)]
        else:
            centers[c] = points[rng.integers(n)]
        sqd = np.minimum(sqd, np.sum((points - centers[c]) ** 2, axis=1))

    prev_inertia = np.inf
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        # repopulate empty clusters with the worst-fitted points
        for c in range(k):
            if not np.any(labels == c):
                far = int(np.argmax(d2[np.arange(n), labels]))
                labels[far] = c
                d2[far, :] = np.inf
                d2[far, c] = 0.0
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
        inertia = float(
            np.sum((points - centers[labels]) ** 2)
        )
        if prev_inertia - inertia <= tol:
            break
        prev_inertia = inertia
    return labels, inertia


def kmeans(points: np.ndarray, k: int, seed: int, restarts: int = 10,
           max_iter: int = 300, tol: float = 1e-8) -> np.ndarray:
    """Seeded k-means with k-means++ init and best-of-restarts by inertia.

    Ties in inertia resolve to the earliest restart, so results are
    deterministic for a fixed seed.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"k must be in 1..{n}")
    best_labels, best_inertia = None, np.inf
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, inertia = _kmeans_once(points, k, rng, max_iter, tol)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def spectral_cluster(D: DistanceMatrix, k: int, seed: int = 0) -> ClusterAssignment:
    """Spectral clustering: affinity, Laplacian, k smallest eigenvectors, k-means.

    The embedding stacks the eigenvectors of the k smallest Laplacian
    eigenvalues as columns; rows are clustered with seeded k-means and the
    labels are renumbered by first occurrence.
    """
    n = D.n
    if k > n:
        raise DataError(f"k={k} exceeds number of series n={n}")
    if k < 2:
        raise DataError("k must be at least 2")
    lap = laplacian(to_affinity(D))
    _, vecs = np.linalg.eigh(lap.values)
    embedding = vecs[:, :k]
    raw = kmeans(embedding, k, seed)
    return ClusterAssignment(_canonical(raw), k)


def rand_index(a: Sequence[int], b: Sequence[int]) -> float:
    """Plain Rand index between two partitions given as label vectors."""
    la = np.asarray(a)
    lb = np.asarray(b)
    if la.shape != lb.shape:
        raise DataError("label vectors differ in length")
    n = la.size
    if n < 2:
        raise DataError("need at least 2 items")
    same_a = la[:, None] == la[None, :]
    same_b = lb[:, None] == lb[None, :]
    iu = np.triu_indices(n, k=1)
    agree = np.count_nonzero(same_a[iu] == same_b[iu])
    return float(agree / iu[0].size)


@dataclass
class Dendrogram:
    """Agglomerative merge tree.

    merges lists (left, right, height, size) in merge order; node ids
    0..n-1 are leaves and n-1+i is the cluster created by merge i (1-based).
    """

    merges: list[tuple[int, int, float, int]]
    leaf_labels: list[str]
    linkage: str

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_labels)

    def to_json_dict(self) -> dict:
        return {
            "linkage": self.linkage,
            "leaves": self.leaf_labels,
            "merges": [
                {"left": l, "right": r, "height": h, "size": s}
                for (l, r, h, s) in self.merges
            ],
        }

    def newick(self) -> str:
        """Newick serialization with branch lengths from merge heights."""
        n = self.n_leaves
        heights = {i: 0.0 for i in range(n)}
        children: dict[int, tuple[int, int]] = {}
        node = n - 1
        for left, right, h, _ in self.merges:
            node += 1
            children[node] = (left, right)
            heights[node] = h

        def render(i: int, parent_h: float) -> str:
            length = parent_h - heights[i]
            if i < n:
                return f"{self.leaf_labels[i]}:{length:.12g}"
            l, r = children[i]
            return f"({render(l, heights[i])},{render(r, heights[i])}):{length:.12g}"

        if not self.merges:
            return f"{self.leaf_labels[0]};"
        root = node
        l, r = children[root]
        h = heights[root]
        return f"({render(l, h)},{render(r, h)});"


def hierarchical_cluster(D: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Bottom-up agglomerative clustering on a distance matrix.

    At each step the pair of clusters at minimal linkage distance merges;
    exact ties resolve to the smallest (left, right) pair of cluster ids,
    which makes the merge sequence deterministic.
    """
    if linkage not in LINKAGES:
        raise DataError(f"unknown linkage {linkage!r}")
    n = D.n
    if n < 2:
        raise DataError("need at least 2 series")
    # dist[(a, b)] with a < b holds the current cluster-to-cluster distance
    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(D.values[i, j])
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n
    while len(active) > 1:
        best = None
        best_d = np.inf
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                pair = (active[ai], active[aj])
                d = dist[pair]
                if d < best_d:
                    best_d = d
                    best = pair
        left, right = best
        new_size = size[left] + size[right]
        merges.append((left, right, best_d, new_size))
        active = [a for a in active if a not in (left, right)]
        for other in active:
            d_l = dist[tuple(sorted((other, left)))]
            d_r = dist[tuple(sorted((other, right)))]
            if linkage == "single":
                d_new = min(d_l, d_r)
            elif linkage == "complete":
                d_new = max(d_l, d_r)
            else:
                d_new = (size[left] * d_l + size[right] * d_r) / new_size
            dist[(other, next_id)] = d_new
        size[next_id] = new_size
        active.append(next_id)
        next_id += 1
    return Dendrogram(merges, list(D.labels), linkage)


def cut_dendrogram(dendro: Dendrogram, k: int) -> ClusterAssignment:
    """Partition into k clusters by removing the k-1 highest merges."""
    n = dendro.n_leaves
    if not 1 <= k <= n:
        raise DataError(f"k must be in 1..{n}")
    order = sorted(range(len(dendro.merges)),
                   key=lambda i: dendro.merges[i][2])
    keep = set(order[: n - k])
    parent = list(range(2 * n - 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, (left, right, _, _) in enumerate(dendro.merges):
        node = n + i
        if i in keep:
            parent[find(left)] = find(node)
            parent[find(right)] = find(node)
    roots = [find(i) for i in range(n)]
    return ClusterAssignment(_canonical(np.asarray(roots)), k)
