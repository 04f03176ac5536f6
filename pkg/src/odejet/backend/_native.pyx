# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled array kernels (numpy C-API, explicit loops).

Same interface as ``py_kernels``.  All inputs are C-contiguous float64
ndarrays (scalars arrive as python floats); outputs are fresh contiguous
arrays.  Loops accumulate strictly left to right, so results are
bit-reproducible within this backend; they can differ from the numpy
backend by last-ulp rounding in reductions and matrix products (numpy uses
pairwise/BLAS accumulation).
"""

cimport numpy as cnp
import numpy as np
from libc.math cimport cos as ccos
from libc.math cimport exp as cexp
from libc.math cimport log as clog
from libc.math cimport sin as csin
from libc.math cimport tanh as ctanh

cnp.import_array()

NAME = "native"


cdef inline cnp.ndarray _empty_like(cnp.ndarray a):
    return cnp.PyArray_EMPTY(cnp.PyArray_NDIM(a), cnp.PyArray_DIMS(a),
                             cnp.NPY_FLOAT64, 0)


cdef inline cnp.ndarray _empty1(cnp.npy_intp n):
    cdef cnp.npy_intp dims[1]
    dims[0] = n
    return cnp.PyArray_EMPTY(1, dims, cnp.NPY_FLOAT64, 0)


cdef inline cnp.ndarray _empty2(cnp.npy_intp r, cnp.npy_intp c):
    cdef cnp.npy_intp dims[2]
    dims[0] = r
    dims[1] = c
    return cnp.PyArray_EMPTY(2, dims, cnp.NPY_FLOAT64, 0)


def add(cnp.ndarray a, cnp.ndarray b):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(a)
    cdef cnp.ndarray out = _empty_like(a)
    cdef double* pa = <double*> cnp.PyArray_DATA(a)
    cdef double* pb = <double*> cnp.PyArray_DATA(b)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = pa[i] + pb[i]
    return out


def sub(cnp.ndarray a, cnp.ndarray b):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(a)
    cdef cnp.ndarray out = _empty_like(a)
    cdef double* pa = <double*> cnp.PyArray_DATA(a)
    cdef double* pb = <double*> cnp.PyArray_DATA(b)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = pa[i] - pb[i]
    return out


def mul(cnp.ndarray a, cnp.ndarray b):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(a)
    cdef cnp.ndarray out = _empty_like(a)
    cdef double* pa = <double*> cnp.PyArray_DATA(a)
    cdef double* pb = <double*> cnp.PyArray_DATA(b)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = pa[i] * pb[i]
    return out


def div(cnp.ndarray a, cnp.ndarray b):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(a)
    cdef cnp.ndarray out = _empty_like(a)
    cdef double* pa = <double*> cnp.PyArray_DATA(a)
    cdef double* pb = <double*> cnp.PyArray_DATA(b)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = pa[i] / pb[i]
    return out


def neg(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = -px[i]
    return out


def exp(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = cexp(px[i])
    return out


def log(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = clog(px[i])
    return out


def sin(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = csin(px[i])
    return out


def cos(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = ccos(px[i])
    return out


def tanh(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = ctanh(px[i])
    return out


def square(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = px[i] * px[i]
    return out


def scale(cnp.ndarray x, double c):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = px[i] * c
    return out


def shift(cnp.ndarray x, double c):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = px[i] + c
    return out


def smul_arr(double s, cnp.ndarray x):
    return scale(x, s)


def sdiv(cnp.ndarray x, double c):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty_like(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = px[i] / c
    return out


def tanh_grad_mul(cnp.ndarray g, cnp.ndarray y):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(g)
    cdef cnp.ndarray out = _empty_like(g)
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* py = <double*> cnp.PyArray_DATA(y)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = pg[i] * (1.0 - py[i] * py[i])
    return out


def lincomb(cs, xs):
    cdef cnp.ndarray x0 = xs[0]
    cdef cnp.npy_intp i, t, n = cnp.PyArray_SIZE(x0)
    cdef cnp.ndarray out = _empty_like(x0)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double* px = <double*> cnp.PyArray_DATA(x0)
    cdef double c = cs[0]
    cdef cnp.ndarray xt
    for i in range(n):
        po[i] = px[i] * c
    for t in range(1, len(xs)):
        xt = xs[t]
        c = cs[t]
        px = <double*> cnp.PyArray_DATA(xt)
        for i in range(n):
            po[i] = po[i] + px[i] * c
    return out


def matvec(cnp.ndarray w, cnp.ndarray x):
    cdef cnp.npy_intp i, j, m = cnp.PyArray_DIMS(w)[0], n = cnp.PyArray_DIMS(w)[1]
    cdef cnp.ndarray out = _empty1(m)
    cdef double* pw = <double*> cnp.PyArray_DATA(w)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc = acc + pw[i * n + j] * px[j]
        po[i] = acc
    return out


def matvec_t(cnp.ndarray w, cnp.ndarray g):
    cdef cnp.npy_intp i, j, m = cnp.PyArray_DIMS(w)[0], n = cnp.PyArray_DIMS(w)[1]
    cdef cnp.ndarray out = _empty1(n)
    cdef double* pw = <double*> cnp.PyArray_DATA(w)
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for j in range(n):
        acc = 0.0
        for i in range(m):
            acc = acc + pw[i * n + j] * pg[i]
        po[j] = acc
    return out


def outer(cnp.ndarray u, cnp.ndarray v):
    cdef cnp.npy_intp i, j, m = cnp.PyArray_SIZE(u), n = cnp.PyArray_SIZE(v)
    cdef cnp.ndarray out = _empty2(m, n)
    cdef double* pu = <double*> cnp.PyArray_DATA(u)
    cdef double* pv = <double*> cnp.PyArray_DATA(v)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(m):
        for j in range(n):
            po[i * n + j] = pu[i] * pv[j]
    return out


def linear(cnp.ndarray x, cnp.ndarray w):
    # (B, n) @ (m, n)^T -> (B, m)
    cdef cnp.npy_intp b, i, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.npy_intp m = cnp.PyArray_DIMS(w)[0]
    cdef cnp.ndarray out = _empty2(B, m)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* pw = <double*> cnp.PyArray_DATA(w)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for b in range(B):
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc = acc + px[b * n + j] * pw[i * n + j]
            po[b * m + i] = acc
    return out


def matmul_nn(cnp.ndarray g, cnp.ndarray w):
    # (B, m) @ (m, n) -> (B, n)
    cdef cnp.npy_intp b, i, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(g)[0], m = cnp.PyArray_DIMS(g)[1]
    cdef cnp.npy_intp n = cnp.PyArray_DIMS(w)[1]
    cdef cnp.ndarray out = _empty2(B, n)
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* pw = <double*> cnp.PyArray_DATA(w)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for b in range(B):
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc = acc + pg[b * m + i] * pw[i * n + j]
            po[b * n + j] = acc
    return out


def matmul_tn(cnp.ndarray g, cnp.ndarray x):
    # (B, m)^T @ (B, n) -> (m, n)
    cdef cnp.npy_intp b, i, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(g)[0], m = cnp.PyArray_DIMS(g)[1]
    cdef cnp.npy_intp n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty2(m, n)
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for b in range(B):
                acc = acc + pg[b * m + i] * px[b * n + j]
            po[i * n + j] = acc
    return out


def add_row(cnp.ndarray x, cnp.ndarray r):
    cdef cnp.npy_intp b, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty2(B, n)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* pr = <double*> cnp.PyArray_DATA(r)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(n):
            po[b * n + j] = px[b * n + j] + pr[j]
    return out


def colsum(cnp.ndarray x):
    cdef cnp.npy_intp b, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty1(n)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for j in range(n):
        acc = 0.0
        for b in range(B):
            acc = acc + px[b * n + j]
        po[j] = acc
    return out


def rowsum(cnp.ndarray x):
    cdef cnp.npy_intp b, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty2(B, 1)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    cdef double acc
    for b in range(B):
        acc = 0.0
        for j in range(n):
            acc = acc + px[b * n + j]
        po[b] = acc
    return out


def col_to_full(cnp.ndarray g, cnp.npy_intp n):
    cdef cnp.npy_intp b, j, B = cnp.PyArray_DIMS(g)[0]
    cdef cnp.ndarray out = _empty2(B, n)
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(n):
            po[b * n + j] = pg[b]
    return out


def concat_scalar(cnp.ndarray x, double s):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef cnp.ndarray out = _empty1(n + 1)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for i in range(n):
        po[i] = px[i]
    po[n] = s
    return out


def append_col_scalar(cnp.ndarray x, double s):
    cdef cnp.npy_intp b, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty2(B, n + 1)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(n):
            po[b * (n + 1) + j] = px[b * n + j]
        po[b * (n + 1) + n] = s
    return out


def append_col_arr(cnp.ndarray x, cnp.ndarray col):
    cdef cnp.npy_intp b, j
    cdef cnp.npy_intp B = cnp.PyArray_DIMS(x)[0], n = cnp.PyArray_DIMS(x)[1]
    cdef cnp.ndarray out = _empty2(B, n + 1)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* pc = <double*> cnp.PyArray_DATA(col)
    cdef double* po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(n):
            po[b * (n + 1) + j] = px[b * n + j]
        po[b * (n + 1) + n] = pc[b]
    return out


def slice_cols(cnp.ndarray x, cnp.npy_intp lo, cnp.npy_intp hi):
    cdef cnp.npy_intp b, j, w = hi - lo
    cdef cnp.npy_intp B, n
    cdef cnp.ndarray out
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double* po
    if cnp.PyArray_NDIM(x) == 1:
        out = _empty1(w)
        po = <double*> cnp.PyArray_DATA(out)
        for j in range(w):
            po[j] = px[lo + j]
        return out
    B = cnp.PyArray_DIMS(x)[0]
    n = cnp.PyArray_DIMS(x)[1]
    out = _empty2(B, w)
    po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(w):
            po[b * w + j] = px[b * n + lo + j]
    return out


def pad_cols(cnp.ndarray g, cnp.npy_intp lo, cnp.npy_intp hi, cnp.npy_intp n):
    cdef cnp.npy_intp b, j, w = hi - lo
    cdef cnp.npy_intp B
    cdef cnp.ndarray out
    cdef double* pg = <double*> cnp.PyArray_DATA(g)
    cdef double* po
    if cnp.PyArray_NDIM(g) == 1:
        out = _empty1(n)
        po = <double*> cnp.PyArray_DATA(out)
        for j in range(n):
            po[j] = 0.0
        for j in range(w):
            po[lo + j] = pg[j]
        return out
    B = cnp.PyArray_DIMS(g)[0]
    out = _empty2(B, n)
    po = <double*> cnp.PyArray_DATA(out)
    for b in range(B):
        for j in range(n):
            po[b * n + j] = 0.0
        for j in range(w):
            po[b * n + lo + j] = pg[b * w + j]
    return out


def take_last(cnp.ndarray x):
    cdef cnp.npy_intp n = cnp.PyArray_SIZE(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    return px[n - 1]


def sum_all(cnp.ndarray x):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(x)
    cdef double* px = <double*> cnp.PyArray_DATA(x)
    cdef double acc = 0.0
    for i in range(n):
        acc = acc + px[i]
    return acc


def dot(cnp.ndarray a, cnp.ndarray b):
    cdef cnp.npy_intp i, n = cnp.PyArray_SIZE(a)
    cdef double* pa = <double*> cnp.PyArray_DATA(a)
    cdef double* pb = <double*> cnp.PyArray_DATA(b)
    cdef double acc = 0.0
    for i in range(n):
        acc = acc + pa[i] * pb[i]
    return acc
