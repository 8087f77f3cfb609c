"""Probabilistic distance clustering (PD-clustering).

Every point's membership probabilities are inversely proportional to its
squared Euclidean distances to the cluster centers, so ``p_ik * d_ik`` is the
same for all ``k``. That common value is the point's joint distance function
(JDF); the clustering objective is the sum of JDF values, equivalently
``sum_ik d_ik * p_ik**2``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_DISTANCE_FLOOR = 1e-12
_DEGENERATE_WEIGHT = 1e-12


class DegenerateClusterError(ValueError):
    """Raised when a cluster receives (numerically) zero total weight."""

    def __init__(self, clusters):
        self.clusters = list(clusters)
        super().__init__(f"clusters {self.clusters} have no weight")


@dataclass(frozen=True)
class PdcConfig:
    max_iters: int = 500
    min_jdf_decrease: float = 1e-9
    distance_floor: float = DEFAULT_DISTANCE_FLOOR
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.distance_floor > 0:
            raise ValueError("distance_floor must be positive")
        if self.min_jdf_decrease < 0:
            raise ValueError("min_jdf_decrease must be nonnegative")


@dataclass
class PdcModel:
    """Fitted PD-clustering solution.

    ``trace`` holds the total JDF of every center configuration visited; the
    last entry may be the non-decreasing value that triggered the stop.
    """

    centers: np.ndarray
    probabilities: np.ndarray
    jdf_total: float
    jdf_per_point: np.ndarray
    iterations: int
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def labels(self):
        from .evaluation import assign_labels

        return assign_labels(self.probabilities)


def _as_data(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("data must be a 2-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    return x


def distances(x, c, floor=None):
    """Squared Euclidean distances between rows of ``x`` and rows of ``c``.

    Returns an ``(n, K)`` array. If ``floor`` is given, entries are clipped
    from below at that value.
    """
    x = _as_data(x)
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if x.shape[1] != c.shape[1]:
        raise ValueError(f"dimension mismatch: data has {x.shape[1]} columns, centers {c.shape[1]}")
    diff = x[:, None, :] - c[None, :, :]
    d = np.einsum("ikj,ikj->ik", diff, diff)
    if floor is not None:
        d = np.maximum(d, floor)
    return d


def membership_probabilities(d):
    """Belonging probabilities ``p_ik = (1/d_ik) / sum_m (1/d_im)``.

    This equals the product form ``prod_{m!=k} d_im / sum_m prod_{l!=m} d_il``
    but does not overflow for large K. ``d`` must be strictly positive.
    """
    inv = 1.0 / np.asarray(d, dtype=float)
    return inv / inv.sum(axis=1, keepdims=True)


def joint_distance_function(d):
    """Per-point JDF and the total objective.

    Returns
    -------
    per_point : (n,) ndarray
        ``prod_m d_im / sum_m prod_{l!=m} d_il``, i.e. ``1 / sum_m 1/d_im``.
    total : float
        ``sum_i sum_k d_ik * p_ik**2``.
    """
    d = np.asarray(d, dtype=float)
    per_point = 1.0 / (1.0 / d).sum(axis=1)
    p = membership_probabilities(d)
    total = float(np.sum(d * p * p))
    return per_point, total


def update_centers(x, p, d=None):
    """Weighted-mean center update.

    Each center is a convex combination of the data rows with weights
    proportional to ``u_ik``. Without ``d`` the weights are ``p_ik**2``,
    which is the exact minimizer of ``sum_i d_ik p_ik**2`` over the centers
    for squared Euclidean ``d``. With ``d`` the weights are ``p_ik**2 / d_ik``
    (the form that matches plain, non-squared Euclidean distances).

    Raises
    ------
    DegenerateClusterError
        If some cluster's total weight is below 1e-12.
    """
    x = _as_data(x)
    p = np.asarray(p, dtype=float)
    u = p * p
    if d is not None:
        u = u / np.asarray(d, dtype=float)
    totals = u.sum(axis=0)
    dead = np.flatnonzero(totals < _DEGENERATE_WEIGHT)
    if dead.size:
        raise DegenerateClusterError(dead)
    return (u / totals).T @ x


def initial_centers(x, k, rng):
    """K distinct data rows drawn without replacement."""
    idx = rng.choice(x.shape[0], size=k, replace=False)
    return x[np.sort(idx)].copy()


def _safe_update(x, p, per_point):
    try:
        return update_centers(x, p)
    except DegenerateClusterError as err:
        log.debug("re-seeding empty clusters %s", err.clusters)
        p = p.copy()
        order = np.argsort(-per_point, kind="stable")
        for slot, k in enumerate(err.clusters):
            i = order[slot]
            p[i] = 0.0
            p[i, k] = 1.0
        return update_centers(x, p)


def pdc(x, k, cfg=None, init=None):
    """Fit PD-clustering with ``k`` clusters.

    Parameters
    ----------
    x : (n, d) array_like
        Data matrix.
    k : int
        Number of clusters.
    cfg : PdcConfig, optional
    init : (k, d) array_like, optional
        Starting centers. Defaults to ``k`` distinct rows of ``x`` drawn with
        ``cfg.seed``.

    Returns
    -------
    PdcModel
        The lowest-JDF center configuration visited. Iteration stops as soon
        as the total JDF fails to drop by more than ``cfg.min_jdf_decrease``
        or after ``cfg.max_iters`` center updates.
    """
    cfg = cfg or PdcConfig()
    x = _as_data(x)
    n = x.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} rows, got {n}")

    if init is None:
        c = initial_centers(x, k, np.random.default_rng(cfg.seed))
    else:
        c = np.array(init, dtype=float)
        if c.shape != (k, x.shape[1]):
            raise ValueError(f"init centers must have shape {(k, x.shape[1])}")

    trace = []
    best = None
    previous = np.inf
    converged = False
    for it in range(cfg.max_iters + 1):
        d = distances(x, c, cfg.distance_floor)
        per_point, total = joint_distance_function(d)
        trace.append(total)
        if not total < previous - cfg.min_jdf_decrease:
            converged = True
            if total < best[2]:
                best = (c, d, total, per_point)
            break
        best = (c, d, total, per_point)
        previous = total
        if it == cfg.max_iters:
            break
        c = _safe_update(x, membership_probabilities(d), per_point)

    c, d, total, per_point = best
    return PdcModel(
        centers=c,
        probabilities=membership_probabilities(d),
        jdf_total=total,
        jdf_per_point=per_point,
        iterations=len(trace) - 1,
        trace=trace,
        converged=converged,
    )
