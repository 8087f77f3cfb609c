"""Factor PD-clustering.

Alternates a Tucker3 decomposition of the unit x variable x cluster
difference tensor (slices ``X - 1 c_k``) with PD-clustering on the data
projected through the variable-mode loadings ``B``. The outer loop stops once
the JDF of the projected solution no longer decreases. The first outer pass
only moves the centers away from their random start and is not counted.
"""

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .pdcluster import PdcConfig, PdcModel, _as_data, initial_centers, pdc, update_centers
from .tucker import TENSOR_KINDS, TuckerConfig, default_ranks, distance_tensor, tucker3

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FpdcConfig:
    K: int
    tucker: TuckerConfig = field(default_factory=TuckerConfig)
    pdc: PdcConfig = field(default_factory=PdcConfig)
    max_outer_iters: int = 50
    min_jdf_decrease: float = 1e-9
    standardize: bool = True
    tensor: str = "signed"
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.tensor not in TENSOR_KINDS:
            raise ValueError(f"tensor must be one of {TENSOR_KINDS}")


@dataclass
class FpdcModel:
    model: PdcModel
    loading: np.ndarray
    projected: np.ndarray
    outer_trace: list
    outer_iterations: int
    converged: bool
    centers_original: np.ndarray
    explained_fraction: float | None = None
    kept_columns: np.ndarray | None = None
    warmup_jdf: float | None = None

    @property
    def jdf(self):
        return self.model.jdf_total

    @property
    def probabilities(self):
        return self.model.probabilities

    @property
    def labels(self):
        return self.model.labels


def standardize(x):
    """Center and scale columns to unit (population) variance.

    Constant columns are dropped with a warning. Returns the scaled matrix and
    the indices of the columns that were kept.
    """
    x = _as_data(x)
    sd = x.std(axis=0)
    keep = np.flatnonzero(sd > 0)
    if keep.size < x.shape[1]:
        dropped = np.setdiff1d(np.arange(x.shape[1]), keep)
        warnings.warn(f"dropping constant columns {dropped.tolist()}", RuntimeWarning, stacklevel=2)
    if keep.size == 0:
        raise ValueError("all columns are constant")
    x = x[:, keep]
    return (x - x.mean(axis=0)) / sd[keep], keep


def project(x, b):
    """Coordinates of the units in the factor space, ``X @ B``."""
    x = _as_data(x)
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if x.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: data has {x.shape[1]} columns, loading has {b.shape[0]} rows")
    return x @ b


def fpdc(x, cfg, loading=None):
    """Fit factor PD-clustering.

    Parameters
    ----------
    x : (n, J) array_like
    cfg : FpdcConfig
    loading : (J, Q) array_like, optional
        Fixed variable loadings. When given the Tucker3 step is skipped and
        this matrix is used as ``B`` in every outer iteration.

    Returns
    -------
    FpdcModel
        The best (lowest-JDF) outer iterate.
    """
    x = _as_data(x)
    n, J = x.shape
    if n < cfg.K:
        raise ValueError(f"need at least K={cfg.K} rows, got {n}")
    kept = np.arange(J)
    if cfg.standardize:
        x, kept = standardize(x)
    if loading is not None:
        loading = np.asarray(loading, dtype=float)
        if loading.ndim != 2 or loading.shape[0] != x.shape[1]:
            raise ValueError(f"loading must have {x.shape[1]} rows")

    centers = initial_centers(x, cfg.K, np.random.default_rng(cfg.seed))
    inner_cfg = replace(cfg.pdc, seed=cfg.seed)
    trace = []
    best = None
    previous = np.inf
    converged = False
    warmup_jdf = None
    for it in range(cfg.max_outer_iters + 1):
        factors = None
        if loading is None:
            g = distance_tensor(x, centers, kind=cfg.tensor)
            factors = tucker3(g, _resolved_tucker(cfg, g.shape))
            b = factors.B
        else:
            b = loading
        xs = project(x, b)
        model = pdc(xs, cfg.K, inner_cfg, init=project(centers, b))
        log.debug("outer %d: JDF %.10g", it, model.jdf_total)
        if it == 0 and loading is None:
            # B from the random starting centers; its JDF is not comparable.
            warmup_jdf = model.jdf_total
            centers = update_centers(x, model.probabilities)
            continue
        trace.append(model.jdf_total)
        if not model.jdf_total < previous - cfg.min_jdf_decrease:
            converged = True
            break
        best = (model, b, xs, centers, factors)
        previous = model.jdf_total
        if len(trace) == cfg.max_outer_iters:
            break
        centers = update_centers(x, model.probabilities)

    model, b, xs, centers, factors = best
    return FpdcModel(
        model=model,
        loading=b,
        projected=xs,
        outer_trace=trace,
        outer_iterations=len(trace),
        converged=converged,
        centers_original=centers,
        explained_fraction=None if factors is None else factors.explained_fraction,
        kept_columns=kept,
        warmup_jdf=warmup_jdf,
    )


def _resolved_tucker(cfg, shape):
    R, Q, S = default_ranks(shape, K=cfg.K, R=cfg.tucker.R, Q=cfg.tucker.Q, S=cfg.tucker.S)
    return replace(cfg.tucker, R=R, Q=Q, S=S)


def explained_variability_scan(x, cfg, qs=None):
    """Tucker3 explained variability at the starting centers for each Q.

    Supports the usual heuristic of picking the smallest Q whose explained
    variability is already large. Returns a list of ``(Q, fraction)`` pairs.
    """
    x = _as_data(x)
    if cfg.standardize:
        x, _ = standardize(x)
    centers = initial_centers(x, cfg.K, np.random.default_rng(cfg.seed))
    g = distance_tensor(x, centers, kind=cfg.tensor)
    qs = range(1, x.shape[1] + 1) if qs is None else qs
    out = []
    for q in qs:
        tcfg = _resolved_tucker(replace(cfg, tucker=replace(cfg.tucker, Q=q, R=None, S=None)), g.shape)
        out.append((q, tucker3(g, tcfg).explained_fraction))
    return out


@dataclass
class MultistartResult:
    best: FpdcModel
    best_run: int
    jdf_samples: np.ndarray
    traces: list
    models: list | None = None


def _one_run(args):
    x, cfg, loading = args
    return fpdc(x, cfg, loading=loading)


def multistart(x, cfg, runs, jobs=1, loading=None, keep_models=False):
    """Run ``runs`` independent fits; run ``r`` uses seed ``cfg.seed + r``.

    Results are ordered by run index regardless of ``jobs``; the best model
    is the lowest final JDF (first index on ties).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    x = _as_data(x)
    tasks = [(x, replace(cfg, seed=cfg.seed + r), loading) for r in range(runs)]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            models = list(pool.map(_one_run, tasks))
    else:
        models = [_one_run(t) for t in tasks]
    jdf = np.array([m.jdf for m in models])
    best_run = int(np.argmin(jdf))
    return MultistartResult(
        best=models[best_run],
        best_run=best_run,
        jdf_samples=jdf,
        traces=[list(m.outer_trace) for m in models],
        models=models if keep_models else None,
    )
