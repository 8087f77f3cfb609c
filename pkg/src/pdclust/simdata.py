"""Seeded benchmark generators.

* Maronna-Zamar design: equicorrelated Gaussian clusters centered on a
  hypersphere, each contaminated by a block of shifted outliers.
* Independent design: axis-aligned Gaussian clusters of unequal sizes.
"""

import csv
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import chi2


@dataclass(frozen=True)
class MzConfig:
    """Maronna-Zamar generator settings.

    ``rho`` is the off-diagonal entry of the transform ``Sigma`` applied to
    standard normal draws (``y = Sigma x``), so the population covariance is
    ``Sigma @ Sigma``. ``rmin_coefs`` are the two multipliers of the
    chi-square radius in the minimum outlier distance.
    """

    K: int = 4
    n_per_cluster: int = 100
    J: int = 7
    rho: float = 0.5
    eps: float = 0.2
    r: float = 4.0
    alpha: float = 0.01
    sphere_radius: float = 15.0
    enforce_rmin: bool = True
    rmin_coefs: tuple = (1.2, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.n_per_cluster < 1:
            raise ValueError("K and n_per_cluster must be positive")
        if self.J < 2:
            raise ValueError("J must be >= 2: no unit vector is orthogonal to the ones vector when J == 1")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        if not 0 <= self.eps < 1:
            raise ValueError("eps must lie in [0, 1)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sphere_radius < 0:
            raise ValueError("sphere_radius must be nonnegative")
        if self.enforce_rmin:
            rmin = r_min(self.J, self.alpha, self.rmin_coefs)
            if self.r < rmin:
                raise ValueError(f"r={self.r} is below r_min={rmin:.4f} for J={self.J}, alpha={self.alpha}")

    def to_dict(self):
        d = asdict(self)
        d["rmin_coefs"] = list(self.rmin_coefs)
        return d


@dataclass
class LabeledDataset:
    x: np.ndarray
    labels: np.ndarray
    outlier_flags: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def K(self):
        return int(self.labels.max())

    def to_csv(self, path):
        write_dataset_csv(path, self.x, self.labels, self.outlier_flags)


def r_min(J, alpha, coefs=(1.2, 1.0)):
    """Smallest outlier shift that keeps contaminants off the cluster.

    ``(a * sqrt(q) + b * sqrt(q)) / sqrt(J)`` with ``q`` the ``1 - alpha``
    chi-square quantile on ``J`` degrees of freedom.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    root = np.sqrt(chi2.ppf(1.0 - alpha, J))
    a, b = coefs
    return float((a * root + b * root) / np.sqrt(J))


def equicorrelation_root(J, rho):
    """The transform ``Sigma`` with unit diagonal and ``rho`` elsewhere."""
    return (1.0 - rho) * np.eye(J) + rho * np.ones((J, J))


def orthogonal_direction(J, rng):
    """Unit vector orthogonal to ``(1, ..., 1)`` from a seeded random draw."""
    if J < 2:
        raise ValueError("no unit vector is orthogonal to the ones vector when J == 1")
    ones = np.ones(J) / np.sqrt(J)
    while True:
        v = rng.standard_normal(J)
        v -= (v @ ones) * ones
        v -= (v @ ones) * ones
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def sphere_points(k, J, radius, rng):
    v = rng.standard_normal((k, J))
    return radius * v / np.linalg.norm(v, axis=1, keepdims=True)


def generate_mz(cfg):
    """Contaminated, correlated Gaussian clusters.

    For every cluster ``n_per_cluster - m`` clean rows are drawn as
    ``center + Sigma z`` and ``m = round(eps * n_per_cluster)`` contaminants
    as ``center + r * sqrt(J) * a0 + Sigma z`` (``round`` is half-to-even).
    Rows are shuffled before returning. Labels run from 1 to K.
    """
    rng = np.random.default_rng(cfg.seed)
    sigma = equicorrelation_root(cfg.J, cfg.rho)
    centers = sphere_points(cfg.K, cfg.J, cfg.sphere_radius, rng)
    a0 = orthogonal_direction(cfg.J, rng)
    m = int(round(cfg.eps * cfg.n_per_cluster))
    shift = cfg.r * np.sqrt(cfg.J) * a0

    xs, labels, flags = [], [], []
    for k in range(cfg.K):
        z = rng.standard_normal((cfg.n_per_cluster, cfg.J))
        y = z @ sigma.T + centers[k]
        y[cfg.n_per_cluster - m:] += shift
        xs.append(y)
        labels.append(np.full(cfg.n_per_cluster, k + 1))
        flags.append(np.arange(cfg.n_per_cluster) >= cfg.n_per_cluster - m)
    x = np.vstack(xs)
    labels = np.concatenate(labels)
    flags = np.concatenate(flags)
    order = rng.permutation(x.shape[0])
    meta = {"generator": "mz", "config": cfg.to_dict(), "centers": centers.tolist(), "a0": a0.tolist(),
            "population_covariance": (sigma @ sigma).tolist()}
    return LabeledDataset(x[order], labels[order], flags[order], meta)


INDEPENDENT_PRESET = {
    "sizes": (150, 120, 100, 80),
    "means": ((0.0, 0.0), (7.0, 0.0), (0.0, 7.0), (7.0, 7.0)),
    "sds": ((1.0, 1.0), (1.2, 0.8), (0.8, 1.2), (1.0, 1.0)),
}


def generate_independent(K, sizes, means, sds, seed):
    """Axis-independent Gaussian clusters with per-cluster sizes."""
    sizes = [int(s) for s in sizes]
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    if not (len(sizes) == len(means) == len(sds) == K):
        raise ValueError("sizes, means and sds must each have K entries")
    if means.shape != sds.shape:
        raise ValueError("means and sds must have the same shape")
    if np.any(sds < 0) or any(s < 0 for s in sizes):
        raise ValueError("sizes and sds must be nonnegative")
    rng = np.random.default_rng(seed)
    xs = [means[k] + sds[k] * rng.standard_normal((sizes[k], means.shape[1])) for k in range(K)]
    labels = np.concatenate([np.full(s, k + 1) for k, s in enumerate(sizes)])
    meta = {"generator": "independent", "sizes": sizes, "means": means.tolist(), "sds": sds.tolist(), "seed": seed}
    return LabeledDataset(np.vstack(xs), labels, np.zeros(labels.size, dtype=bool), meta)


def preset(name, seed=0):
    """Named datasets: ``mz-paper`` (400 x 7) and ``indep-450x2``."""
    if name == "mz-paper":
        return generate_mz(MzConfig(seed=seed))
    if name == "indep-450x2":
        p = INDEPENDENT_PRESET
        return generate_independent(4, p["sizes"], p["means"], p["sds"], seed)
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("mz-paper", "indep-450x2")


def write_dataset_csv(path, x, labels=None, outlier_flags=None):
    x = np.asarray(x, dtype=float)
    header = [f"v{j + 1}" for j in range(x.shape[1])]
    if labels is not None:
        header.append("label")
    if outlier_flags is not None:
        header.append("outlier")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(x):
            out = [repr(float(v)) for v in row]
            if labels is not None:
                out.append(str(int(labels[i])))
            if outlier_flags is not None:
                out.append(str(int(bool(outlier_flags[i]))))
            w.writerow(out)


def read_dataset_csv(path):
    """Read a dataset CSV; ``label`` and ``outlier`` columns are optional.

    Returns ``(x, labels or None, outlier_flags or None)``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header = rows[0]
    body = np.array(rows[1:], dtype=object)
    if body.size == 0:
        raise ValueError(f"{path} has no data rows")
    cols = {name: j for j, name in enumerate(header)}
    feature = [j for j, name in enumerate(header) if name not in ("label", "outlier")]
    x = body[:, feature].astype(float)
    labels = body[:, cols["label"]].astype(int) if "label" in cols else None
    flags = body[:, cols["outlier"]].astype(int).astype(bool) if "outlier" in cols else None
    return x, labels, flags
