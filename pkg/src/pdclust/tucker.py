"""Tucker3 decomposition of the unit x variable x cluster distance tensor."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import mode_product, truncated_basis, unfold


@dataclass(frozen=True)
class TuckerConfig:
    """Component counts and ALS controls.

    ``None`` ranks are resolved against the tensor shape by
    :func:`default_ranks`.
    """

    R: int | None = None
    Q: int | None = None
    S: int | None = None
    max_sweeps: int = 200
    fit_tolerance: float = 1e-8
    init: str = "hosvd"
    seed: int = 0

    def __post_init__(self):
        if self.init not in ("hosvd", "random"):
            raise ValueError("init must be 'hosvd' or 'random'")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass
class TuckerFactors:
    U: np.ndarray
    B: np.ndarray
    V: np.ndarray
    core: np.ndarray
    explained_fraction: float
    sweeps: int
    fit_trace: list = field(default_factory=list)

    def reconstruct(self):
        return reconstruct(self.core, self.U, self.B, self.V)


def default_ranks(shape, K=None, R=None, Q=None, S=None):
    """Resolve unset ranks: Q = K-1 clamped to [1, J], S = min(K, Q), R = min(n, Q*S)."""
    n, J, k_dim = shape
    K = k_dim if K is None else K
    if Q is None:
        Q = min(max(K - 1, 1), J)
    if S is None:
        S = min(k_dim, Q)
    if R is None:
        R = min(n, Q * S)
    return R, Q, S


TENSOR_KINDS = ("abs", "signed", "squared")


def distance_tensor(x, c, kind="abs"):
    """Per-variable unit-to-center differences as an ``(n, J, K)`` array.

    ``kind="abs"`` gives ``|x[i, j] - c[k, j]|``; ``"signed"`` keeps the sign
    (slice ``k`` is ``X - 1 c_k``) and ``"squared"`` squares it.
    """
    if kind not in TENSOR_KINDS:
        raise ValueError(f"kind must be one of {TENSOR_KINDS}")
    x = np.asarray(x, dtype=float)
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if x.ndim != 2 or x.shape[1] != c.shape[1]:
        raise ValueError(f"dimension mismatch between data {x.shape} and centers {c.shape}")
    diff = x[:, :, None] - c.T[None, :, :]
    if kind == "abs":
        return np.abs(diff)
    if kind == "squared":
        return diff * diff
    return diff


def reconstruct(core, U, B, V):
    out = mode_product(core, U, 1)
    out = mode_product(out, B, 2)
    return mode_product(out, V, 3)


def explained_variability(f, g):
    """``1 - ||G - reconstruction||^2 / ||G||^2`` clamped to [0, 1].

    A zero tensor counts as perfectly fitted.
    """
    g = np.asarray(g, dtype=float)
    total = float(np.sum(g * g))
    if total == 0.0:
        return 1.0
    resid = g - reconstruct(f.core, f.U, f.B, f.V)
    return float(np.clip(1.0 - np.sum(resid * resid) / total, 0.0, 1.0))


def _core(g, U, B, V):
    out = mode_product(g, U.T, 1)
    out = mode_product(out, B.T, 2)
    return mode_product(out, V.T, 3)


def _fit(g, U, B, V, gnorm2):
    core = _core(g, U, B, V)
    if gnorm2 == 0.0:
        return core, 1.0
    resid = g - reconstruct(core, U, B, V)
    return core, float(np.clip(1.0 - np.sum(resid * resid) / gnorm2, 0.0, 1.0))


def tucker3(g, cfg=None):
    """Fit a Tucker3 model by higher-order orthogonal iteration (ALS).

    Starting from the truncated HOSVD (or a seeded random orthonormal start),
    each sweep replaces U, B and V in turn by the dominant left singular
    subspace of the tensor contracted with the other two factors. The fit is
    nondecreasing across sweeps; iteration stops once it improves by less
    than ``cfg.fit_tolerance``.
    """
    cfg = cfg or TuckerConfig()
    g = np.asarray(g, dtype=float)
    if g.ndim != 3:
        raise ValueError("tucker3 expects a 3-way array")
    if not np.all(np.isfinite(g)):
        raise ValueError("tensor contains non-finite entries")
    n, J, K = g.shape
    R, Q, S = default_ranks(g.shape, R=cfg.R, Q=cfg.Q, S=cfg.S)
    for name, r, dim in (("R", R, n), ("Q", Q, J), ("S", S, K)):
        if not 1 <= r <= dim:
            raise ValueError(f"{name}={r} must lie in [1, {dim}]")

    if cfg.init == "hosvd":
        U = truncated_basis(unfold(g, 1), R, complete=True)
        B = truncated_basis(unfold(g, 2), Q, complete=True)
        V = truncated_basis(unfold(g, 3), S, complete=True)
    else:
        rng = np.random.default_rng(cfg.seed)
        U = truncated_basis(rng.standard_normal((n, R)), R)
        B = truncated_basis(rng.standard_normal((J, Q)), Q)
        V = truncated_basis(rng.standard_normal((K, S)), S)

    gnorm2 = float(np.sum(g * g))
    core, fit = _fit(g, U, B, V, gnorm2)
    trace = [fit]
    sweeps = 0
    while sweeps < cfg.max_sweeps:
        sweeps += 1
        y = mode_product(mode_product(g, B.T, 2), V.T, 3)
        U = truncated_basis(unfold(y, 1), R, complete=True)
        y = mode_product(mode_product(g, U.T, 1), V.T, 3)
        B = truncated_basis(unfold(y, 2), Q, complete=True)
        y = mode_product(mode_product(g, U.T, 1), B.T, 2)
        V = truncated_basis(unfold(y, 3), S, complete=True)
        core, new_fit = _fit(g, U, B, V, gnorm2)
        trace.append(new_fit)
        done = new_fit - fit < cfg.fit_tolerance
        fit = new_fit
        if done:
            break

    return TuckerFactors(U=U, B=B, V=V, core=core, explained_fraction=fit, sweeps=sweeps, fit_trace=trace)
