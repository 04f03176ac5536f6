"""Pure-numpy array kernels: the reference backend.

Every kernel takes C-contiguous float64 arrays (plus python-float scalars
where noted) and returns a fresh C-contiguous float64 array, or a python
float for reductions.  The native extension implements the same interface
with explicit loops; results may differ from numpy by rounding in the
BLAS-backed products, so cross-backend comparisons use tolerances while
within-backend runs are bit-reproducible.

Summation orders are fixed: matrix products accumulate left to right over
the contraction index, ``lincomb`` accumulates terms in argument order.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def add(a, b):
    return a + b


def sub(a, b):
    return a - b


def mul(a, b):
    return a * b


def div(a, b):
    return a / b


def neg(x):
    return -x


def exp(x):
    return np.exp(x)


def log(x):
    return np.log(x)


def sin(x):
    return np.sin(x)


def cos(x):
    return np.cos(x)


def tanh(x):
    return np.tanh(x)


def square(x):
    return x * x


def scale(x, c):
    return x * c


def shift(x, c):
    return x + c


def smul_arr(s, x):
    return s * x


def sdiv(x, c):
    return x / c


def tanh_grad_mul(g, y):
    return g * (1.0 - y * y)


def lincomb(cs, xs):
    out = xs[0] * cs[0]
    for c, x in zip(cs[1:], xs[1:]):
        out += c * x
    return out


def matvec(w, x):
    return w @ x


def matvec_t(w, g):
    return w.T @ g


def outer(g, x):
    return np.outer(g, x)


def linear(x, w):
    # (B, n) @ (m, n)^T -> (B, m)
    return x @ w.T


def matmul_nn(g, w):
    return g @ w


def matmul_tn(g, x):
    return np.ascontiguousarray(g.T @ x)


def add_row(x, b):
    return x + b


def colsum(x):
    return x.sum(axis=0)


def rowsum(x):
    return x.sum(axis=1, keepdims=True)


def col_to_full(g, n):
    return np.repeat(g, n, axis=1)


def concat_scalar(x, s):
    out = np.empty(x.shape[0] + 1)
    out[:-1] = x
    out[-1] = s
    return out


def append_col_scalar(x, s):
    b, n = x.shape
    out = np.empty((b, n + 1))
    out[:, :n] = x
    out[:, n] = s
    return out


def append_col_arr(x, col):
    b, n = x.shape
    out = np.empty((b, n + 1))
    out[:, :n] = x
    out[:, n] = col[:, 0]
    return out


def slice_cols(x, lo, hi):
    if x.ndim == 1:
        return x[lo:hi].copy()
    return np.ascontiguousarray(x[:, lo:hi])


def pad_cols(g, lo, hi, n):
    if g.ndim == 1:
        out = np.zeros(n)
        out[lo:hi] = g
        return out
    out = np.zeros((g.shape[0], n))
    out[:, lo:hi] = g
    return out


def take_last(x):
    return float(x[-1])


def sum_all(x):
    return float(x.sum())


def dot(a, b):
    return float(a @ b)
