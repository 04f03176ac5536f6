"""Truncated Taylor-series arithmetic (Taylor-mode AD).

A :class:`TaylorBundle` carries a primal value and K *normalized* Taylor
coefficients ``x_[i] = x_i / i!`` where ``x_i`` is the i-th derivative
coefficient.  Normalization is strictly internal: every public surface
(``jet``-style entry points, conversions) speaks derivative coefficients,
and the k! scaling happens at the boundary via exact integer
multiplication / true division.  Internally the normalization pays off by
turning every propagation recurrence into a plain Cauchy convolution.

The recurrences per primitive (y, z, w are normalized coefficient
sequences; j runs over 1..k unless noted):

* ``y = z + c*w``      ->  ``y_[k] = z_[k] + c*w_[k]``
* ``y = z * w``        ->  ``y_[k] = sum_{j=0..k} z_[j] * w_[k-j]``
* ``y = z / w``        ->  ``y_[k] = (z_[k] - sum_{j=0..k-1} y_[j] w_[k-j]) / w_[0]``
* ``y = exp(z)``       ->  ``k*y_[k] = sum_j j*z_[j] * y_[k-j]``
* ``s, c = sin/cos(z)``->  ``k*s_[k] = sum_j j*z_[j] * c_[k-j]``,
  ``k*c_[k] = -sum_j j*z_[j] * s_[k-j]`` (coupled)
* ``u = tanh(z)``      ->  ``k*u_[k] = sum_j j*z_[j] * w_[k-j]`` coupled with
  ``w = 1 - u*u`` via ``w_[k] = -sum_{j=0..k} u_[j] u_[k-j]``.

The tanh recurrence is the coupled first-derivative form rather than an
exp/divide composition; it stays finite for any primal magnitude and is
validated against the nested dual-number oracle like every other rule.

Each recurrence term is built from registered primitives, so bundles whose
coefficients are tape variables are differentiated by composition — the
reverse pass sees only ordinary ``mul``/``lincomb``/``sdiv`` nodes.

Causality is structural: coefficient k of any output depends only on input
coefficients of index <= k.
"""

from __future__ import annotations

import math

import numpy as np

from . import ops
from .errors import OdejetError, ShapeError, SingularityError
from .ops import (Arith, apply_prim, bcast_full, lincomb, peek, scale, sdiv,
                  shape_of)

_FACT = [float(math.factorial(k)) for k in range(26)]


def factorial(k: int) -> float:
    return _FACT[k]


class TaylorBundle(Arith):
    """Primal value plus K normalized Taylor coefficients (same shape)."""

    __slots__ = ("primal", "coeffs")
    _carrier_level = 3

    def __init__(self, primal, coeffs, validate: bool = True):
        self.primal = primal
        self.coeffs = tuple(coeffs)
        if validate:
            s = shape_of(primal)
            for c in self.coeffs:
                if shape_of(c) != s:
                    raise ShapeError("TaylorBundle", s, shape_of(c))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def shape(self):
        return shape_of(self.primal)

    def coefficient(self, k: int):
        """Normalized coefficient x_[k] (k = 0 is the primal)."""
        return self.primal if k == 0 else self.coeffs[k - 1]

    def derivative_coefficients(self) -> list:
        """Derivative coefficients [x_1 .. x_K] (primal excluded)."""
        return [scale(c, _FACT[i + 1]) if i else c
                for i, c in enumerate(self.coeffs)]

    @classmethod
    def from_derivatives(cls, primal, derivs) -> "TaylorBundle":
        """Build from derivative coefficients [x_1 .. x_K]."""
        coeffs = [sdiv(d, _FACT[i + 1]) if i else d
                  for i, d in enumerate(derivs)]
        return cls(primal, coeffs)

    def __repr__(self):
        return f"TaylorBundle(order={self.order}, shape={self.shape})"


def taylor_from_derivatives(derivs) -> list:
    """Normalized coefficients x_[i] = x_i / i! for i = 0, 1, ... (true division)."""
    return [sdiv(d, _FACT[i]) if i > 1 else d for i, d in enumerate(derivs)]


def derivatives_from_taylor(coeffs) -> list:
    """Inverse boundary conversion: x_i = i! * x_[i]."""
    return [scale(c, _FACT[i]) if i > 1 else c for i, c in enumerate(coeffs)]


# --------------------------------------------------------------------------
# rule plumbing

def _is_bundle(x) -> bool:
    return type(x) is TaylorBundle


def _orders_match(name, a, b):
    if a.order != b.order:
        raise OdejetError(
            f"{name}: Taylor order mismatch ({a.order} vs {b.order})")


def _coef(x, k: int):
    """k-th normalized coefficient of a bundle, or None for constants (k>=1)."""
    if _is_bundle(x):
        return x.coefficient(k)
    return x if k == 0 else None


def _sum_terms(terms):
    if len(terms) == 1:
        return terms[0]
    return lincomb([1.0] * len(terms), terms)


def _zeros_like_coef(ref):
    shp = shape_of(ref)
    return np.zeros(shp) if shp else 0.0


def _bilinear_rule(op):
    """Taylor rule factory for bilinear primitives: Cauchy convolution."""

    def rule(args, aux):
        a, b = args
        ka = a.order if _is_bundle(a) else 0
        kb = b.order if _is_bundle(b) else 0
        if ka and kb:
            _orders_match(op.__name__ if hasattr(op, "__name__") else "bilinear", a, b)
        K = max(ka, kb)
        out = []
        for k in range(K + 1):
            terms = []
            for j in range(k + 1):
                aj = _coef(a, j)
                bj = _coef(b, k - j)
                if aj is None or bj is None:
                    continue
                terms.append(op(aj, bj))
            if terms:
                out.append(_sum_terms(terms))
            else:
                out.append(_zeros_like_coef(peek(out[0])))
        return TaylorBundle(out[0], out[1:], validate=False)

    return rule


def _coefficientwise_rule(prim):
    """Taylor rule for linear single-argument primitives."""

    def rule(args, aux):
        (x,) = args
        return TaylorBundle(
            apply_prim(prim, (x.primal,), aux),
            tuple(apply_prim(prim, (c,), aux) for c in x.coeffs),
            validate=False)

    return rule


# --------------------------------------------------------------------------
# arithmetic rules

def _rule_add(args, aux):
    a, b = args
    if _is_bundle(a) and _is_bundle(b):
        _orders_match("add", a, b)
        return TaylorBundle(
            ops.add(a.primal, b.primal),
            tuple(ops.add(x, y) for x, y in zip(a.coeffs, b.coeffs)),
            validate=False)
    if _is_bundle(a):
        return TaylorBundle(ops.add(a.primal, b), a.coeffs, validate=False)
    return TaylorBundle(ops.add(a, b.primal), b.coeffs, validate=False)


def _rule_sub(args, aux):
    a, b = args
    if _is_bundle(a) and _is_bundle(b):
        _orders_match("sub", a, b)
        return TaylorBundle(
            ops.sub(a.primal, b.primal),
            tuple(ops.sub(x, y) for x, y in zip(a.coeffs, b.coeffs)),
            validate=False)
    if _is_bundle(a):
        return TaylorBundle(ops.sub(a.primal, b), a.coeffs, validate=False)
    return TaylorBundle(ops.sub(a, b.primal),
                        tuple(ops.neg(c) for c in b.coeffs), validate=False)


def _rule_shift(args, aux):
    (x,) = args
    return TaylorBundle(ops.shift(x.primal, aux[0]), x.coeffs, validate=False)


def _rule_div(args, aux):
    z, w = args
    if not _is_bundle(w):
        # constant denominator: independent coefficientwise division
        wl = w if isinstance(peek(w), np.ndarray) else bcast_full(w, shape_of(z.primal))
        return TaylorBundle(
            ops.div(z.primal, wl),
            tuple(ops.div(c, wl) for c in z.coeffs),
            validate=False)
    w0p = peek(w.primal)
    if np.any(np.asarray(w0p) == 0.0):
        raise SingularityError("series division: denominator primal has zeros")
    if _is_bundle(z):
        _orders_match("div", z, w)
    K = w.order
    w0 = w.primal
    z0 = _coef(z, 0)
    if not isinstance(peek(z0), np.ndarray) and isinstance(w0p, np.ndarray):
        z0 = bcast_full(z0, shape_of(w0))
    ys = [ops.div(z0, w0)]
    for k in range(1, K + 1):
        acc = [ops.mul(ys[j], w.coefficient(k - j)) for j in range(k)]
        zk = _coef(z, k)
        num = _sum_terms(acc)
        if zk is None:
            num = ops.neg(num)
        else:
            num = ops.sub(zk, num)
        ys.append(ops.div(num, w0))
    return TaylorBundle(ys[0], ys[1:], validate=False)


def _rule_exp(args, aux):
    (z,) = args
    K = z.order
    ys = [ops.exp(z.primal)]
    for k in range(1, K + 1):
        terms = [ops.mul(z.coefficient(j), ys[k - j]) for j in range(1, k + 1)]
        ys.append(lincomb([j / k for j in range(1, k + 1)], terms))
    return TaylorBundle(ys[0], ys[1:], validate=False)


def _sin_cos_bundles(z: TaylorBundle):
    K = z.order
    ss = [ops.sin(z.primal)]
    cs = [ops.cos(z.primal)]
    for k in range(1, K + 1):
        ws = [j / k for j in range(1, k + 1)]
        s_terms = [ops.mul(z.coefficient(j), cs[k - j]) for j in range(1, k + 1)]
        c_terms = [ops.mul(z.coefficient(j), ss[k - j]) for j in range(1, k + 1)]
        ss.append(lincomb(ws, s_terms))
        cs.append(lincomb([-w for w in ws], c_terms))
    return (TaylorBundle(ss[0], ss[1:], validate=False),
            TaylorBundle(cs[0], cs[1:], validate=False))


def _rule_sin(args, aux):
    return _sin_cos_bundles(args[0])[0]


def _rule_cos(args, aux):
    return _sin_cos_bundles(args[0])[1]


def _self_conv_terms(seq, k: int, sign: float):
    """Weighted terms of sum_j seq[j]*seq[k-j], folding symmetric pairs."""
    cs, xs = [], []
    for j in range(k // 2 + 1):
        i = k - j
        if i == j:
            cs.append(sign)
            xs.append(ops.square(seq[j]))
        else:
            cs.append(2.0 * sign)
            xs.append(ops.mul(seq[j], seq[i]))
    return cs, xs


def _rule_tanh(args, aux):
    (z,) = args
    K = z.order
    us = [ops.tanh(z.primal)]
    # w = 1 - u^2 (the derivative factor), advanced alongside u
    ws = [ops.shift(ops.neg(ops.square(us[0])), 1.0)]
    for k in range(1, K + 1):
        u_terms = [ops.mul(z.coefficient(j), ws[k - j]) for j in range(1, k + 1)]
        us.append(lincomb([j / k for j in range(1, k + 1)], u_terms))
        cs, xs = _self_conv_terms(us, k, -1.0)
        ws.append(lincomb(cs, xs))
    return TaylorBundle(us[0], us[1:], validate=False)


def _rule_square(args, aux):
    (z,) = args
    K = z.order
    seq = [z.primal] + list(z.coeffs)
    out = [ops.square(z.primal)]
    for k in range(1, K + 1):
        cs, xs = _self_conv_terms(seq, k, 1.0)
        out.append(lincomb(cs, xs))
    return TaylorBundle(out[0], out[1:], validate=False)


def _rule_lincomb(args, aux):
    K = 0
    for a in args:
        if _is_bundle(a):
            K = max(K, a.order)
    prim_terms = [_coef(a, 0) for a in args]
    out = [lincomb(aux, prim_terms)]
    for k in range(1, K + 1):
        cs, xs = [], []
        for c, a in zip(aux, args):
            ck = _coef(a, k)
            if ck is not None:
                cs.append(c)
                xs.append(ck)
        out.append(lincomb(cs, xs) if xs else _zeros_like_coef(peek(out[0])))
    return TaylorBundle(out[0], out[1:], validate=False)


def _rule_concat_scalar(args, aux):
    x, s = args
    K = (x.order if _is_bundle(x) else 0) or (s.order if _is_bundle(s) else 0)
    if _is_bundle(x) and _is_bundle(s):
        _orders_match("concat_scalar", x, s)
    out = [ops.concat_scalar(_coef(x, 0), _coef(s, 0))]
    for k in range(1, K + 1):
        xk = _coef(x, k)
        if xk is None:
            xk = np.zeros(shape_of(peek(_coef(x, 0))))
        sk = _coef(s, k)
        if sk is None:
            sk = 0.0
        out.append(ops.concat_scalar(xk, sk))
    return TaylorBundle(out[0], out[1:], validate=False)


def _rule_append_col(args, aux):
    x, s = args
    K = (x.order if _is_bundle(x) else 0) or (s.order if _is_bundle(s) else 0)
    if _is_bundle(x) and _is_bundle(s):
        _orders_match("append_col", x, s)
    out = [ops.append_col(_coef(x, 0), _coef(s, 0))]
    for k in range(1, K + 1):
        xk = _coef(x, k)
        if xk is None:
            xk = np.zeros(shape_of(peek(_coef(x, 0))))
        sk = _coef(s, k)
        if sk is None:
            sk = 0.0
        out.append(ops.append_col(xk, sk))
    return TaylorBundle(out[0], out[1:], validate=False)


def _rule_add_row(args, aux):
    x, b = args
    if _is_bundle(x) and not _is_bundle(b):
        return TaylorBundle(ops.add_row(x.primal, b), x.coeffs, validate=False)
    if _is_bundle(x) and _is_bundle(b):
        _orders_match("add_row", x, b)
        return TaylorBundle(
            ops.add_row(x.primal, b.primal),
            tuple(ops.add_row(c, d) for c, d in zip(x.coeffs, b.coeffs)),
            validate=False)
    # constant matrix, bundle bias
    return TaylorBundle(
        ops.add_row(x, b.primal),
        tuple(ops.row_to_full(c, peek(x).shape[0]) for c in b.coeffs),
        validate=False)


def _attach_rules():
    P = ops.PRIMS
    P["add"].taylor = _rule_add
    P["sub"].taylor = _rule_sub
    P["shift"].taylor = _rule_shift
    P["div"].taylor = _rule_div
    P["exp"].taylor = _rule_exp
    P["sin"].taylor = _rule_sin
    P["cos"].taylor = _rule_cos
    P["tanh"].taylor = _rule_tanh
    P["square"].taylor = _rule_square
    P["lincomb"].taylor = _rule_lincomb
    P["concat_scalar"].taylor = _rule_concat_scalar
    P["append_col"].taylor = _rule_append_col
    P["add_row"].taylor = _rule_add_row

    P["mul"].taylor = _bilinear_rule(ops.mul)
    P["smul"].taylor = _bilinear_rule(ops.smul)
    P["dot"].taylor = _bilinear_rule(ops.dot)
    P["matvec"].taylor = _bilinear_rule(ops.matvec)
    P["matvec_t"].taylor = _bilinear_rule(ops.matvec_t)
    P["outer"].taylor = _bilinear_rule(ops.outer)
    P["linear"].taylor = _bilinear_rule(ops.linear)
    P["matmul_nn"].taylor = _bilinear_rule(ops.matmul_nn)
    P["matmul_tn"].taylor = _bilinear_rule(ops.matmul_tn)

    for name in ("neg", "scale", "sdiv", "colsum", "rowsum", "col_to_full",
                 "row_to_full", "slice_cols", "pad_cols", "sum_all",
                 "take_last", "pad_last", "bcast_full"):
        P[name].taylor = _coefficientwise_rule(P[name])
    # 'log' and 'tanh_grad_mul' intentionally carry no Taylor rule: they are
    # outside the series registry and raise UnsupportedOperationError in jets.


_attach_rules()


# --------------------------------------------------------------------------
# public series operations

def taylor_add(z: TaylorBundle, w: TaylorBundle, c: float = 1.0) -> TaylorBundle:
    """y = z + c*w on bundles; c = 0 returns z unchanged."""
    if c == 0.0:
        return z
    if c == 1.0:
        return ops.add(z, w)
    return ops.add(z, scale(w, c))


def taylor_mul(z: TaylorBundle, w: TaylorBundle) -> TaylorBundle:
    return ops.mul(z, w)


def taylor_div(z: TaylorBundle, w: TaylorBundle) -> TaylorBundle:
    return ops.div(z, w)


def taylor_exp(z: TaylorBundle) -> TaylorBundle:
    return ops.exp(z)


def taylor_sin_cos(z: TaylorBundle) -> tuple[TaylorBundle, TaylorBundle]:
    """Coupled sine/cosine propagation; returns (sin bundle, cos bundle)."""
    return _sin_cos_bundles(z)


def taylor_tanh(z: TaylorBundle) -> TaylorBundle:
    return ops.tanh(z)
