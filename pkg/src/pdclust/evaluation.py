"""Cluster-quality measures and the k-means baseline.

Cluster labels are integers in ``1..K`` throughout.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_PERMUTATION_K = 8


def assign_labels(p):
    """Row-wise argmax of a probability matrix; ties go to the lowest index."""
    p = np.asarray(p, dtype=float)
    return np.argmax(p, axis=1) + 1


@dataclass
class DbsReport:
    values: np.ndarray
    raw: np.ndarray
    labels: np.ndarray
    per_cluster: dict = field(default_factory=dict)

    def summary(self):
        out = {"mean": float(self.values.mean()), "min": float(self.values.min()),
               "max": float(self.values.max()), "clusters": {}}
        for k, vals in self.per_cluster.items():
            out["clusters"][str(k)] = {"size": int(vals.size),
                                      "mean": float(vals.mean()) if vals.size else None}
        return out

    def sorted_rows(self):
        """``(cluster, point index, dbs)`` grouped by cluster, decreasing dbs."""
        rows = []
        for k in sorted(self.per_cluster):
            members = np.flatnonzero(self.labels == k)
            order = members[np.argsort(-self.values[members], kind="stable")]
            rows.extend((k, int(i), float(self.values[i])) for i in order)
        return rows


def dbs(p, labels=None, prob_floor=1e-6):
    """Density-based silhouette from membership probabilities.

    For point ``i`` assigned to cluster ``a``, the raw score is
    ``log(p_ia / p_ib)`` where ``b`` is the most probable cluster other than
    ``a``. Scores are divided by the largest absolute raw score. Probabilities
    are clamped to ``[prob_floor, 1]`` first.
    """
    p = np.clip(np.asarray(p, dtype=float), prob_floor, 1.0)
    n, K = p.shape
    if K < 2:
        raise ValueError("dbs needs at least two clusters")
    labels = assign_labels(p) if labels is None else np.asarray(labels, dtype=int)
    rows = np.arange(n)
    own = p[rows, labels - 1]
    others = p.copy()
    others[rows, labels - 1] = -np.inf
    runner_up = others.max(axis=1)
    raw = np.log(own / runner_up)
    scale = np.max(np.abs(raw))
    values = raw / scale if scale > 0 else np.zeros(n)
    per_cluster = {k: values[labels == k] for k in range(1, K + 1)}
    return DbsReport(values=values, raw=raw, labels=labels, per_cluster=per_cluster)


def best_permutation(labels, truth, K=None):
    """Relabeling of ``labels`` that agrees most with ``truth``.

    Returns a dict mapping each predicted label to a truth label.
    """
    labels = np.asarray(labels, dtype=int)
    truth = np.asarray(truth, dtype=int)
    K = K or int(max(labels.max(), truth.max()))
    if K > MAX_PERMUTATION_K:
        raise ValueError(f"exhaustive matching supports K <= {MAX_PERMUTATION_K}, got {K}")
    confusion = np.zeros((K, K), dtype=int)
    np.add.at(confusion, (labels - 1, truth - 1), 1)
    best, best_hits = None, -1
    for perm in itertools.permutations(range(K)):
        hits = confusion[np.arange(K), perm].sum()
        if hits > best_hits:
            best, best_hits = perm, hits
    return {k + 1: best[k] + 1 for k in range(K)}


def misclassification_rate(labels, truth, exclude=None):
    """Error rate after the best one-to-one relabeling of ``labels``.

    Points flagged in ``exclude`` are dropped from numerator and denominator.
    """
    labels = np.asarray(labels, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if labels.shape != truth.shape:
        raise ValueError("labels and truth must have the same length")
    if exclude is not None:
        keep = ~np.asarray(exclude, dtype=bool)
        labels, truth = labels[keep], truth[keep]
    if labels.size == 0:
        return 0.0
    mapping = best_permutation(labels, truth)
    mapped = np.array([mapping[k] for k in labels])
    return float(np.mean(mapped != truth))


def within_variance(x, labels):
    """Within-groups deviance: squared distances of points to their cluster mean."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    labels = np.asarray(labels, dtype=int)
    K = int(labels.max())
    total = 0.0
    for k in range(1, K + 1):
        members = x[labels == k]
        if members.shape[0] == 0:
            raise ValueError(f"cluster {k} is empty")
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    within: float
    iterations: int
    trace: list


def kmeans(x, K, seed=0, max_iters=300):
    """Lloyd's algorithm from K distinct seeded rows.

    Stops at an assignment fixed point. A cluster that empties is re-seeded
    with the point farthest from its current center.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < K:
        raise ValueError(f"need at least K={K} rows, got {n}")
    rng = np.random.default_rng(seed)
    centers = x[np.sort(rng.choice(n, size=K, replace=False))].copy()
    labels = None
    trace = []
    it = 0
    for it in range(1, max_iters + 1):
        d = ((x[:, None, :] - centers[None]) ** 2).sum(axis=2)
        new = np.argmin(d, axis=1) + 1
        for k in range(1, K + 1):
            if not np.any(new == k):
                far = int(np.argmax(d[np.arange(n), new - 1]))
                new[far] = k
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = np.vstack([x[labels == k].mean(axis=0) for k in range(1, K + 1)])
        trace.append(within_variance(x, labels))
    return KMeansResult(labels=labels, centers=centers, within=trace[-1], iterations=it, trace=trace)


def objective_histogram(values, buckets=20):
    """Equal-width histogram of run objectives over their observed range.

    A range below ``1e-9`` relative to the largest magnitude is treated as
    zero: every run then lands in the first bucket. Returns ``(edges, counts)``.
    """
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= 1e-9 * max(1.0, abs(lo), abs(hi)):
        counts = np.zeros(buckets, dtype=int)
        counts[0] = v.size
        return np.full(buckets + 1, lo), counts
    counts, edges = np.histogram(v, bins=buckets, range=(lo, hi))
    return edges, counts


def modal_share(values, buckets=20):
    """Fraction of runs falling in the most populated histogram bucket."""
    _, counts = objective_histogram(values, buckets)
    return float(counts.max() / counts.sum())
