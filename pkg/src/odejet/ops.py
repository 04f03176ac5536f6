"""Primitive operation registry and carrier dispatch.

Every numeric operation in the library is one of a closed set of
*primitives*.  A primitive bundles its plain (array) implementation, a
scalar-operation cost for the opcount instrumentation, and its reverse-mode
partials; the truncated-Taylor-series propagation recurrence and the
first-order dual-number rule are attached by :mod:`odejet.taylor` and
:mod:`odejet.nested` when those modules load.

Values flowing through primitives are one of four carriers, dispatched by
priority:

* plain python floats / float64 ndarrays (level 0) — direct kernel calls;
* ``Var`` — tape-recorded values for reverse-mode AD (level 1);
* ``Dual`` — nestable first-order forward-mode pairs (level 2);
* ``TaylorBundle`` — truncated Taylor series (level 3).

Mixed arguments are allowed: the highest-level carrier wins and lower-level
arguments are treated as constants by its rule.  Bundles may carry ``Var``
coefficients, which is how reverse-mode gradients flow through series
recurrences (the recurrences decompose into taped primitives; there are no
bespoke higher-order reverse rules).

All arrays are C-contiguous float64.  Elementwise primitives require equal
shapes — there is no broadcasting beyond the explicit ``add_row`` /
``col_to_full`` style primitives — and shape violations raise
:class:`~odejet.errors.ShapeError` naming both shapes.
"""

from __future__ import annotations

import math

import numpy as np

from .backend import kernels as K
from .errors import ShapeError, UnsupportedOperationError
from .opcount import counting, emit

__all__ = [
    "Prim",
    "PRIMS",
    "apply_prim",
    "as_tensor",
    "shape_of",
    "size_of",
    "peek",
    "add", "sub", "mul", "div", "neg", "scale", "shift", "smul", "sdiv",
    "exp", "log", "sin", "cos", "tanh", "square", "tanh_grad_mul",
    "lincomb", "matvec", "matvec_t", "outer", "linear",
    "matmul_nn", "matmul_tn", "add_row", "colsum", "rowsum",
    "col_to_full", "row_to_full", "concat_scalar", "append_col",
    "slice_cols", "pad_cols", "sum_all", "dot", "take_last", "bcast_full",
]


class Prim:
    """One registered primitive: name, evaluator, cost, and AD rules."""

    __slots__ = ("name", "impl", "flops", "vjp", "taylor", "dual")

    def __init__(self, name, impl, flops, vjp):
        self.name = name
        self.impl = impl
        self.flops = flops
        self.vjp = vjp
        self.taylor = None  # attached by odejet.taylor
        self.dual = None    # attached by odejet.nested

    def __repr__(self):
        return f"<prim {self.name}>"


PRIMS: dict[str, Prim] = {}

# Test hook used by the gradcheck negative control: name of a primitive
# whose reverse partials are deliberately perturbed.  Never set in normal
# operation.
_corrupt_vjp: str | None = None


def _register(name, impl, flops, vjp) -> Prim:
    p = Prim(name, impl, flops, vjp)
    PRIMS[name] = p
    return p


# --------------------------------------------------------------------------
# dispatch

# Injected by odejet.tape at import time; applies a primitive on a tape.
_TAPE_APPLY = None

# Concrete-type -> carrier level, grown lazily (plain types map to 0).
_LEVELS: dict = {float: 0, int: 0, np.ndarray: 0, np.float64: 0}


def _level_of(a) -> int:
    t = type(a)
    l = _LEVELS.get(t)
    if l is None:
        l = getattr(a, "_carrier_level", 0)
        _LEVELS[t] = l
    return l


def apply_prim(prim: Prim, args: tuple, aux: tuple = ()):
    lvl = 0
    for a in args:
        l = _LEVELS.get(type(a))
        if l is None:
            l = _level_of(a)
        if l > lvl:
            lvl = l
    if lvl == 0:
        if counting():
            emit(prim.flops(args, aux))
        return prim.impl(args, aux)
    if lvl == 1:
        return _TAPE_APPLY(prim, args, aux)
    if lvl == 2:
        h = prim.dual
    else:
        h = prim.taylor
    if h is None:
        kind = "dual-number" if lvl == 2 else "Taylor"
        raise UnsupportedOperationError(
            f"primitive '{prim.name}' has no {kind} propagation rule"
        )
    return h(args, aux)


def plain_eval(prim: Prim, vals: tuple, aux: tuple = ()):
    """Evaluate a primitive on plain values (used by tape record/replay)."""
    if counting():
        emit(prim.flops(vals, aux))
    return prim.impl(vals, aux)


# --------------------------------------------------------------------------
# small helpers

def as_tensor(x) -> np.ndarray:
    """Coerce to a C-contiguous float64 ndarray (the library's Tensor)."""
    a = np.ascontiguousarray(x, dtype=np.float64)
    return a


def shape_of(x):
    """Shape of a value regardless of carrier."""
    lvl = getattr(x, "_carrier_level", 0)
    if lvl == 0:
        return x.shape if isinstance(x, np.ndarray) else ()
    return x.shape


def size_of(x) -> int:
    if isinstance(x, np.ndarray):
        return x.size
    return 1


def peek(x):
    """Plain value behind any carrier (primal point for bundles/duals)."""
    while True:
        lvl = getattr(x, "_carrier_level", 0)
        if lvl == 0:
            return x
        if lvl == 1:
            x = x.value
        elif lvl == 2:
            x = x.re
        else:
            x = x.primal


def _is_scalar(x) -> bool:
    return not isinstance(x, np.ndarray) and getattr(x, "_carrier_level", 0) == 0


def _check_same_shape(name, a, b):
    sa = a.shape if isinstance(a, np.ndarray) else ()
    sb = b.shape if isinstance(b, np.ndarray) else ()
    if sa != sb:
        raise ShapeError(name, sa, sb)


class Arith:
    """Operator sugar shared by all carrier classes.

    Scalar (python number) operands route through ``shift``/``scale``;
    scalar division multiplies by the reciprocal.  Anything outside the
    registry raises ``UnsupportedOperationError`` rather than silently
    falling back to numpy semantics.
    """

    __slots__ = ()
    __array_ufunc__ = None  # keep numpy from hijacking mixed expressions

    def __add__(self, o):
        if isinstance(o, (int, float)):
            return shift(self, float(o))
        return add(self, o)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, (int, float)):
            return shift(self, -float(o))
        return sub(self, o)

    def __rsub__(self, o):
        if isinstance(o, (int, float)):
            return shift(neg(self), float(o))
        return sub(o, self)

    def __mul__(self, o):
        if isinstance(o, (int, float)):
            return scale(self, float(o))
        return mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, (int, float)):
            return scale(self, 1.0 / float(o))
        return div(self, o)

    def __rtruediv__(self, o):
        num = o
        if isinstance(o, (int, float)):
            shp = shape_of(self)
            num = np.full(shp, float(o)) if shp else float(o)
        return div(num, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        if isinstance(p, int) and p >= 1:
            if p == 1:
                return self
            if p == 2:
                return square(self)
            out = self
            for _ in range(p - 1):
                out = mul(out, self)
            return out
        raise UnsupportedOperationError(
            f"power with exponent {p!r} is outside the primitive registry"
        )


# --------------------------------------------------------------------------
# elementwise binaries

def _impl_add(vals, aux):
    a, b = vals
    if isinstance(a, np.ndarray):
        _check_same_shape("add", a, b)
        return K.add(a, b)
    return a + b


def _impl_sub(vals, aux):
    a, b = vals
    if isinstance(a, np.ndarray):
        _check_same_shape("sub", a, b)
        return K.sub(a, b)
    return a - b


def _impl_mul(vals, aux):
    a, b = vals
    if isinstance(a, np.ndarray):
        _check_same_shape("mul", a, b)
        return K.mul(a, b)
    return a * b


def _impl_div(vals, aux):
    a, b = vals
    if isinstance(a, np.ndarray):
        _check_same_shape("div", a, b)
        return K.div(a, b)
    return a / b


def _flops_ew2(vals, aux):
    return size_of(vals[0])


P_ADD = _register("add", _impl_add, _flops_ew2,
                  lambda g, out, vals, aux: (g, g))
P_SUB = _register("sub", _impl_sub, _flops_ew2,
                  lambda g, out, vals, aux: (g, neg(g)))
P_MUL = _register("mul", _impl_mul, _flops_ew2,
                  lambda g, out, vals, aux: (mul(g, vals[1]), mul(g, vals[0])))


def _vjp_div(g, out, vals, aux):
    a, b = vals
    da = div(g, b)
    db = neg(div(mul(g, out), b))
    return (da, db)


P_DIV = _register("div", _impl_div, _flops_ew2, _vjp_div)


# --------------------------------------------------------------------------
# elementwise unaries and scalar-parameter ops

def _unary(name, kfun, pyfun, vjp, nflops=1):
    def impl(vals, aux):
        (x,) = vals
        if isinstance(x, np.ndarray):
            return kfun(x)
        return pyfun(x)

    return _register(name, impl,
                     lambda vals, aux: nflops * size_of(vals[0]), vjp)


P_NEG = _unary("neg", K.neg, lambda x: -x,
               lambda g, out, vals, aux: (neg(g),))
P_EXP = _unary("exp", K.exp, math.exp,
               lambda g, out, vals, aux: (mul(g, out),))
P_LOG = _unary("log", K.log, math.log,
               lambda g, out, vals, aux: (div(g, vals[0]),))
P_SIN = _unary("sin", K.sin, math.sin,
               lambda g, out, vals, aux: (mul(g, cos(vals[0])),))
P_COS = _unary("cos", K.cos, math.cos,
               lambda g, out, vals, aux: (neg(mul(g, sin(vals[0]))),))
P_TANH = _unary("tanh", K.tanh, math.tanh,
                lambda g, out, vals, aux: (tanh_grad_mul(g, out),))
P_SQUARE = _unary("square", K.square, lambda x: x * x,
                  lambda g, out, vals, aux: (scale(mul(g, vals[0]), 2.0),))


def _impl_scale(vals, aux):
    (x,) = vals
    if isinstance(x, np.ndarray):
        return K.scale(x, aux[0])
    return x * aux[0]


P_SCALE = _register("scale", _impl_scale, _flops_ew2,
                    lambda g, out, vals, aux: (scale(g, aux[0]),))


def _impl_shift(vals, aux):
    (x,) = vals
    if isinstance(x, np.ndarray):
        return K.shift(x, aux[0])
    return x + aux[0]


P_SHIFT = _register("shift", _impl_shift, _flops_ew2,
                    lambda g, out, vals, aux: (g,))


def _impl_sdiv(vals, aux):
    (x,) = vals
    if isinstance(x, np.ndarray):
        return K.sdiv(x, aux[0])
    return x / aux[0]


P_SDIV = _register("sdiv", _impl_sdiv, _flops_ew2,
                   lambda g, out, vals, aux: (sdiv(g, aux[0]),))


def _impl_smul(vals, aux):
    s, x = vals
    if isinstance(x, np.ndarray):
        return K.smul_arr(float(s), x)
    return s * x


def _vjp_smul(g, out, vals, aux):
    s, x = vals
    if isinstance(peek(x), np.ndarray):
        ds = sum_all(mul(g, x))
    else:
        ds = mul(g, x)
    return (ds, smul(s, g))


P_SMUL = _register("smul", _impl_smul,
                   lambda vals, aux: size_of(vals[1]), _vjp_smul)


def _impl_tanh_grad_mul(vals, aux):
    g0, y = vals
    if isinstance(g0, np.ndarray):
        _check_same_shape("tanh_grad_mul", g0, y)
        return K.tanh_grad_mul(g0, y)
    return g0 * (1.0 - y * y)


def _vjp_tanh_grad_mul(g, out, vals, aux):
    g0, y = vals
    dg0 = tanh_grad_mul(g, y)
    dy = scale(mul(mul(g, g0), y), -2.0)
    return (dg0, dy)


P_TANH_GRAD_MUL = _register(
    "tanh_grad_mul", _impl_tanh_grad_mul,
    lambda vals, aux: 3 * size_of(vals[0]), _vjp_tanh_grad_mul)


def _impl_lincomb(vals, aux):
    if isinstance(vals[0], np.ndarray):
        return K.lincomb(aux, vals)
    out = vals[0] * aux[0]
    for c, x in zip(aux[1:], vals[1:]):
        out += c * x
    return out


P_LINCOMB = _register(
    "lincomb", _impl_lincomb,
    lambda vals, aux: (2 * len(vals) - 1) * size_of(vals[0]),
    lambda g, out, vals, aux: tuple(scale(g, c) for c in aux))


# --------------------------------------------------------------------------
# linear algebra

def _impl_matvec(vals, aux):
    w, x = vals
    if w.ndim != 2 or x.ndim != 1 or w.shape[1] != x.shape[0]:
        raise ShapeError("matvec", w.shape, x.shape)
    return K.matvec(w, x)


P_MATVEC = _register(
    "matvec", _impl_matvec,
    lambda vals, aux: 2 * size_of(vals[0]),
    lambda g, out, vals, aux: (outer(g, vals[1]), matvec_t(vals[0], g)))

P_MATVEC_T = _register(
    "matvec_t", lambda vals, aux: K.matvec_t(*vals),
    lambda vals, aux: 2 * size_of(vals[0]),
    lambda g, out, vals, aux: (outer(vals[1], g), matvec(vals[0], g)))

P_OUTER = _register(
    "outer", lambda vals, aux: K.outer(*vals),
    lambda vals, aux: size_of(vals[0]) * size_of(vals[1]),
    lambda g, out, vals, aux: (matvec(g, vals[1]), matvec_t(g, vals[0])))


def _impl_linear(vals, aux):
    x, w = vals
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ShapeError("linear", x.shape, w.shape)
    return K.linear(x, w)


P_LINEAR = _register(
    "linear", _impl_linear,
    lambda vals, aux: 2 * vals[0].shape[0] * size_of(vals[1]),
    lambda g, out, vals, aux: (matmul_nn(g, vals[1]), matmul_tn(g, vals[0])))

P_MATMUL_NN = _register(
    "matmul_nn", lambda vals, aux: K.matmul_nn(*vals),
    lambda vals, aux: 2 * vals[0].shape[0] * size_of(vals[1]),
    lambda g, out, vals, aux: (linear(g, vals[1]), matmul_tn(vals[0], g)))

P_MATMUL_TN = _register(
    "matmul_tn", lambda vals, aux: K.matmul_tn(*vals),
    lambda vals, aux: 2 * vals[1].shape[0] * size_of(vals[0]),
    lambda g, out, vals, aux: (linear(vals[1], g), matmul_nn(vals[0], g)))


def _impl_add_row(vals, aux):
    x, b = vals
    if x.ndim != 2 or b.ndim != 1 or x.shape[1] != b.shape[0]:
        raise ShapeError("add_row", x.shape, b.shape)
    return K.add_row(x, b)


P_ADD_ROW = _register(
    "add_row", _impl_add_row,
    lambda vals, aux: size_of(vals[0]),
    lambda g, out, vals, aux: (g, colsum(g)))

P_COLSUM = _register(
    "colsum", lambda vals, aux: K.colsum(vals[0]),
    lambda vals, aux: size_of(vals[0]),
    lambda g, out, vals, aux: (row_to_full(g, peek(vals[0]).shape[0]),))

P_ROWSUM = _register(
    "rowsum", lambda vals, aux: K.rowsum(vals[0]),
    lambda vals, aux: size_of(vals[0]),
    lambda g, out, vals, aux: (col_to_full(g, peek(vals[0]).shape[1]),))

P_COL_TO_FULL = _register(
    "col_to_full", lambda vals, aux: K.col_to_full(vals[0], aux[0]),
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (rowsum(g),))


def _impl_row_to_full(vals, aux):
    return np.tile(vals[0], (aux[0], 1))


P_ROW_TO_FULL = _register(
    "row_to_full", _impl_row_to_full,
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (colsum(g),))


# --------------------------------------------------------------------------
# structural ops (free of arithmetic; zero opcount cost)

def _impl_concat_scalar(vals, aux):
    x, s = vals
    if x.ndim != 1:
        raise ShapeError("concat_scalar", x.shape, ())
    return K.concat_scalar(x, float(s))


def _vjp_concat_scalar(g, out, vals, aux):
    n = peek(vals[0]).shape[0]
    return (slice_cols(g, 0, n), take_last(g))


P_CONCAT_SCALAR = _register("concat_scalar", _impl_concat_scalar,
                            lambda vals, aux: 0, _vjp_concat_scalar)


def _impl_append_col(vals, aux):
    x, s = vals
    if isinstance(s, np.ndarray):
        if s.shape != (x.shape[0], 1):
            raise ShapeError("append_col", x.shape, s.shape)
        return K.append_col_arr(x, s)
    return K.append_col_scalar(x, float(s))


def _vjp_append_col(g, out, vals, aux):
    x, s = vals
    n = peek(x).shape[1]
    dx = slice_cols(g, 0, n)
    tail = slice_cols(g, n, n + 1)
    ds = tail if isinstance(peek(s), np.ndarray) else sum_all(tail)
    return (dx, ds)


P_APPEND_COL = _register("append_col", _impl_append_col,
                         lambda vals, aux: 0, _vjp_append_col)


def _impl_slice_cols(vals, aux):
    return K.slice_cols(vals[0], aux[0], aux[1])


def _vjp_slice_cols(g, out, vals, aux):
    shp = peek(vals[0]).shape
    return (pad_cols(g, aux[0], aux[1], shp[-1]),)


P_SLICE_COLS = _register("slice_cols", _impl_slice_cols,
                         lambda vals, aux: 0, _vjp_slice_cols)

P_PAD_COLS = _register(
    "pad_cols", lambda vals, aux: K.pad_cols(vals[0], *aux),
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (slice_cols(g, aux[0], aux[1]),))

P_TAKE_LAST = _register(
    "take_last", lambda vals, aux: K.take_last(vals[0]),
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (pad_last(g, peek(vals[0]).shape[0]),))


def _impl_pad_last(vals, aux):
    out = np.zeros(aux[0])
    out[-1] = vals[0]
    return out


P_PAD_LAST = _register(
    "pad_last", _impl_pad_last,
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (take_last(g),))

P_BCAST_FULL = _register(
    "bcast_full", lambda vals, aux: np.full(aux[0], float(vals[0])),
    lambda vals, aux: 0,
    lambda g, out, vals, aux: (sum_all(g),))


# --------------------------------------------------------------------------
# reductions

def _impl_sum_all(vals, aux):
    (x,) = vals
    if isinstance(x, np.ndarray):
        return K.sum_all(x)
    return x


def _vjp_sum_all(g, out, vals, aux):
    shp = shape_of(peek(vals[0]))
    if shp == ():
        return (g,)
    return (bcast_full(g, shp),)


P_SUM_ALL = _register("sum_all", _impl_sum_all,
                      lambda vals, aux: size_of(vals[0]), _vjp_sum_all)


def _impl_dot(vals, aux):
    a, b = vals
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError("dot", a.shape, b.shape)
    return K.dot(a, b)


P_DOT = _register(
    "dot", _impl_dot,
    lambda vals, aux: 2 * size_of(vals[0]),
    lambda g, out, vals, aux: (smul(g, vals[1]), smul(g, vals[0])))


# --------------------------------------------------------------------------
# public functional API

def add(a, b):
    return apply_prim(P_ADD, (a, b))


def sub(a, b):
    return apply_prim(P_SUB, (a, b))


def mul(a, b):
    return apply_prim(P_MUL, (a, b))


def div(a, b):
    return apply_prim(P_DIV, (a, b))


def neg(x):
    return apply_prim(P_NEG, (x,))


def scale(x, c: float):
    return apply_prim(P_SCALE, (x,), (float(c),))


def shift(x, c: float):
    return apply_prim(P_SHIFT, (x,), (float(c),))


def sdiv(x, c: float):
    """True elementwise division by a scalar constant (not reciprocal-mul)."""
    return apply_prim(P_SDIV, (x,), (float(c),))


def smul(s, x):
    """Scalar times tensor; both factors may be carriers."""
    return apply_prim(P_SMUL, (s, x))


def exp(x):
    return apply_prim(P_EXP, (x,))


def log(x):
    return apply_prim(P_LOG, (x,))


def sin(x):
    return apply_prim(P_SIN, (x,))


def cos(x):
    return apply_prim(P_COS, (x,))


def tanh(x):
    return apply_prim(P_TANH, (x,))


def square(x):
    return apply_prim(P_SQUARE, (x,))


def tanh_grad_mul(g, y):
    """Fused g * (1 - y**2) with y = tanh(x); the tanh reverse rule."""
    return apply_prim(P_TANH_GRAD_MUL, (g, y))


def lincomb(coeffs, xs):
    """Fixed linear combination sum_i coeffs[i] * xs[i] (coeffs are floats)."""
    xs = tuple(xs)
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) != len(xs) or not xs:
        raise ValueError("lincomb needs matching, nonempty coeffs and values")
    if len(xs) == 1:
        return scale(xs[0], coeffs[0])
    return apply_prim(P_LINCOMB, xs, coeffs)


def matvec(w, x):
    return apply_prim(P_MATVEC, (w, x))


def matvec_t(w, g):
    return apply_prim(P_MATVEC_T, (w, g))


def outer(u, v):
    return apply_prim(P_OUTER, (u, v))


def linear(x, w):
    """Batched affine core: rows of x through w, i.e. x @ w.T."""
    return apply_prim(P_LINEAR, (x, w))


def matmul_nn(g, w):
    return apply_prim(P_MATMUL_NN, (g, w))


def matmul_tn(g, x):
    return apply_prim(P_MATMUL_TN, (g, x))


def add_row(x, b):
    return apply_prim(P_ADD_ROW, (x, b))


def colsum(x):
    return apply_prim(P_COLSUM, (x,))


def rowsum(x):
    return apply_prim(P_ROWSUM, (x,))


def col_to_full(g, n: int):
    return apply_prim(P_COL_TO_FULL, (g,), (int(n),))


def row_to_full(b, nrows: int):
    return apply_prim(P_ROW_TO_FULL, (b,), (int(nrows),))


def concat_scalar(x, s):
    """Append scalar s to a vector; the time-augmentation workhorse."""
    return apply_prim(P_CONCAT_SCALAR, (x, s))


def append_col(x, s):
    """Append a column (scalar broadcast or (B,1)) to a (B,n) matrix."""
    return apply_prim(P_APPEND_COL, (x, s))


def slice_cols(x, lo: int, hi: int):
    return apply_prim(P_SLICE_COLS, (x,), (int(lo), int(hi)))


def pad_cols(g, lo: int, hi: int, n: int):
    return apply_prim(P_PAD_COLS, (g,), (int(lo), int(hi), int(n)))


def take_last(x):
    return apply_prim(P_TAKE_LAST, (x,))


def pad_last(s, n: int):
    return apply_prim(P_PAD_LAST, (s,), (int(n),))


def bcast_full(s, shape):
    return apply_prim(P_BCAST_FULL, (s,), (tuple(shape),))


def sum_all(x):
    return apply_prim(P_SUM_ALL, (x,))


def dot(a, b):
    return apply_prim(P_DOT, (a, b))


def run_vjp_rule(prim: Prim, g, out, vals, aux):
    """Apply a primitive's reverse partials, honoring the corruption hook."""
    parts = prim.vjp(g, out, vals, aux)
    if _corrupt_vjp is not None and prim.name == _corrupt_vjp:
        parts = tuple(None if p is None else scale(p, 1.001) for p in parts)
    return parts
