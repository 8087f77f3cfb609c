"""Dense matrix and three-way tensor helpers.

Unfolding convention
--------------------
A tensor ``t`` of shape ``(n, J, K)`` is matricized so that the remaining
indices vary in their natural order with the earliest mode fastest
(column-major over the remaining modes). For mode 1 the column of entry
``(i, j, k)`` is ``j + J * k``, which makes

    unfold(t, 1) == U @ unfold(core, 1) @ kron(V, B).T

for ``t = core x1 U x2 B x3 V``. Mode 2 columns are ``i + n * k`` (pairs with
``kron(V, U)``) and mode 3 columns are ``i + n * j`` (pairs with
``kron(B, U)``). Modes are numbered 1, 2, 3.
"""

import numpy as np


def _check_tensor(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-way array, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains non-finite entries")
    return t


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def unfold(t, mode):
    """Mode-`mode` matricization of a 3-way array (see module docstring)."""
    t = _check_tensor(t)
    axis = _check_mode(mode)
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1), order="F")


def fold(m, mode, shape):
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    axis = _check_mode(mode)
    shape = tuple(int(s) for s in shape)
    moved = (shape[axis],) + tuple(s for a, s in enumerate(shape) if a != axis)
    m = np.asarray(m, dtype=float)
    if m.shape != (moved[0], int(np.prod(moved[1:]))):
        raise ValueError(f"matrix of shape {m.shape} cannot fold into {shape} along mode {mode}")
    return np.moveaxis(np.reshape(m, moved, order="F"), 0, axis)


def mode_product(t, m, mode):
    """Multiply tensor ``t`` along ``mode`` by matrix ``m`` (``t x_mode m``)."""
    t = np.asarray(t, dtype=float)
    axis = _check_mode(mode)
    out = np.tensordot(m, t, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def _fix_signs(q):
    # Largest-magnitude entry of every column is made positive.
    idx = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[idx, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return q * signs


def truncated_basis(m, r, *, complete=False):
    """Orthonormal basis of the dominant rank-`r` left singular subspace.

    Parameters
    ----------
    m : (rows, cols) array_like
        Finite input matrix.
    r : int
        Number of basis vectors, ``1 <= r <= min(rows, cols)``.
    complete : bool, optional
        Allow ``min(rows, cols) < r <= rows``; the extra columns are an
        orthonormal completion of the null directions. Used by the Tucker3
        fit when a requested rank exceeds the rank of an unfolding.

    Returns
    -------
    (rows, r) ndarray
        Columns are orthonormal; each column's largest-magnitude entry is
        positive.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("truncated_basis expects a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    rows, cols = m.shape
    limit = rows if complete else min(rows, cols)
    if not 1 <= r <= limit:
        raise ValueError(f"rank {r} out of range [1, {limit}] for a {rows}x{cols} matrix")
    u, _, _ = np.linalg.svd(m, full_matrices=r > min(rows, cols))
    return _fix_signs(u[:, :r])


def kronecker(a, b):
    """Kronecker product of two finite matrices."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("kronecker inputs must be finite")
    return np.kron(a, b)
