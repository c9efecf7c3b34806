"""Pure numpy quintic B-spline scatter/gather (fallback for the compiled kernel)."""

import numpy as np


def weights(f):
    """Quintic B-spline weights at node offsets -2..3, shape ``f.shape + (6,)``."""
    f = np.asarray(f, dtype=np.float64)
    g = 1.0 - f
    a = 2.0 - f
    b = 1.0 + f
    c = 3.0 - f
    d = 2.0 + f
    f5 = f**5
    g5 = g**5
    return np.stack(
        [
            g5 / 120.0,
            (a**5 - 6.0 * g5) / 120.0,
            (c**5 - 6.0 * a**5 + 15.0 * g5) / 120.0,
            (d**5 - 6.0 * b**5 + 15.0 * f5) / 120.0,
            (b**5 - 6.0 * f5) / 120.0,
            f5 / 120.0,
        ],
        axis=-1,
    )


def _stencil(x1, x2, nx1, nx2, dx1, dx2):
    xi = x1 / dx1
    eta = x2 / dx2
    i0 = np.floor(xi)
    j0 = np.floor(eta)
    wx = weights(xi - i0)
    wy = weights(eta - j0)
    offs = np.arange(-2, 4)
    ii = (i0.astype(np.int64)[:, None] + offs) % nx1
    jj = (j0.astype(np.int64)[:, None] + offs) % nx2
    return ii, jj, wx, wy


def deposit(x1, x2, w, nx1, nx2, dx1, dx2):
    x1 = np.ascontiguousarray(x1, dtype=np.float64)
    x2 = np.ascontiguousarray(x2, dtype=np.float64)
    ii, jj, wx, wy = _stencil(x1, x2, nx1, nx2, dx1, dx2)
    # (p, a, b) ordering matches the compiled loop, so per-node summation order agrees
    contrib = (w[:, None] * wx)[:, :, None] * wy[:, None, :]
    flat = ii[:, :, None] * nx2 + jj[:, None, :]
    out = np.bincount(flat.ravel(), weights=contrib.ravel(), minlength=nx1 * nx2)
    return out.reshape(nx1, nx2)


def gather(x1, x2, grids, dx1, dx2):
    x1 = np.ascontiguousarray(x1, dtype=np.float64)
    x2 = np.ascontiguousarray(x2, dtype=np.float64)
    m, nx1, nx2 = grids.shape
    ii, jj, wx, wy = _stencil(x1, x2, nx1, nx2, dx1, dx2)
    out = np.empty((m, x1.shape[0]))
    for c in range(m):
        # vals[p, a, b] = grid[ii[p, a], jj[p, b]]
        vals = grids[c][ii[:, :, None], jj[:, None, :]]
        out[c] = np.einsum("pa,pab,pb->p", wx, vals, wy)
    return out
