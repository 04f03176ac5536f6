"""Nested first-order forward mode: the independent oracle.

A :class:`Dual` carries (value, tangent) and nests — components may
themselves be duals — so K-fold nesting computes K-th derivatives using
nothing but first-order product/quotient/chain rules.  This is the
reference the Taylor recurrences are validated against: it shares no
series arithmetic with :mod:`odejet.taylor`.

Nesting does no work sharing between orders, so its cost grows
geometrically in K (roughly doubling per order on product-heavy
functions), versus the O(K^2) jet.  ``nested_opcount`` measures that, and
the benchmark CLI compares the two engines head to head.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .opcount import OpCounter
from .taylor import factorial


class Dual(ops.Arith):
    """First-order dual number; components may be duals for higher orders."""

    __slots__ = ("re", "du")
    _carrier_level = 2

    def __init__(self, re, du):
        self.re = re
        self.du = du

    @property
    def shape(self):
        return ops.shape_of(self.re)

    def __repr__(self):
        return f"Dual({self.re!r}, {self.du!r})"


def _parts(x):
    if type(x) is Dual:
        return x.re, x.du
    return x, None


def _bilinear_dual(op):
    def rule(args, aux):
        a, b = args
        ar, ad = _parts(a)
        br, bd = _parts(b)
        re = op(ar, br)
        if ad is not None and bd is not None:
            du = ops.add(op(ad, br), op(ar, bd))
        elif ad is not None:
            du = op(ad, br)
        else:
            du = op(ar, bd)
        return Dual(re, du)

    return rule


def _linear_unary_dual(prim):
    def rule(args, aux):
        (x,) = args
        return Dual(ops.apply_prim(prim, (x.re,), aux),
                    ops.apply_prim(prim, (x.du,), aux))

    return rule


def _rule_add(args, aux):
    a, b = args
    ar, ad = _parts(a)
    br, bd = _parts(b)
    du = ad if bd is None else (bd if ad is None else ops.add(ad, bd))
    return Dual(ops.add(ar, br), du)


def _rule_sub(args, aux):
    a, b = args
    ar, ad = _parts(a)
    br, bd = _parts(b)
    if bd is None:
        du = ad
    elif ad is None:
        du = ops.neg(bd)
    else:
        du = ops.sub(ad, bd)
    return Dual(ops.sub(ar, br), du)


def _rule_div(args, aux):
    a, b = args
    ar, ad = _parts(a)
    br, bd = _parts(b)
    re = ops.div(ar, br)
    if bd is None:
        du = ops.div(ad, br)
    else:
        corr = ops.mul(re, bd)
        num = ops.neg(corr) if ad is None else ops.sub(ad, corr)
        du = ops.div(num, br)
    return Dual(re, du)


def _rule_shift(args, aux):
    (x,) = args
    return Dual(ops.shift(x.re, aux[0]), x.du)


def _rule_exp(args, aux):
    (x,) = args
    e = ops.exp(x.re)
    return Dual(e, ops.mul(e, x.du))


def _rule_log(args, aux):
    (x,) = args
    return Dual(ops.log(x.re), ops.div(x.du, x.re))


def _rule_sin(args, aux):
    (x,) = args
    return Dual(ops.sin(x.re), ops.mul(ops.cos(x.re), x.du))


def _rule_cos(args, aux):
    (x,) = args
    return Dual(ops.cos(x.re), ops.neg(ops.mul(ops.sin(x.re), x.du)))


def _rule_tanh(args, aux):
    (x,) = args
    t = ops.tanh(x.re)
    return Dual(t, ops.tanh_grad_mul(x.du, t))


def _rule_square(args, aux):
    (x,) = args
    return Dual(ops.square(x.re), ops.scale(ops.mul(x.re, x.du), 2.0))


def _rule_tanh_grad_mul(args, aux):
    g, y = args
    gr, gd = _parts(g)
    yr, yd = _parts(y)
    re = ops.tanh_grad_mul(gr, yr)
    terms = []
    if gd is not None:
        terms.append(ops.tanh_grad_mul(gd, yr))
    if yd is not None:
        terms.append(ops.scale(ops.mul(ops.mul(gr, yr), yd), -2.0))
    du = terms[0] if len(terms) == 1 else ops.add(terms[0], terms[1])
    return Dual(re, du)


def _rule_lincomb(args, aux):
    res, dus, dcs = [], [], []
    for c, a in zip(aux, args):
        ar, ad = _parts(a)
        res.append(ar)
        if ad is not None:
            dus.append(ad)
            dcs.append(c)
    return Dual(ops.lincomb(aux, res), ops.lincomb(dcs, dus))


def _zero_coef(ref):
    shp = ops.shape_of(ref)
    return np.zeros(shp) if shp else 0.0


def _rule_concat_scalar(args, aux):
    x, s = args
    xr, xd = _parts(x)
    sr, sd = _parts(s)
    if xd is None:
        xd = _zero_coef(ops.peek(xr))
    if sd is None:
        sd = 0.0
    return Dual(ops.concat_scalar(xr, sr), ops.concat_scalar(xd, sd))


def _rule_append_col(args, aux):
    x, s = args
    xr, xd = _parts(x)
    sr, sd = _parts(s)
    if xd is None:
        xd = _zero_coef(ops.peek(xr))
    if sd is None:
        sd = 0.0
    return Dual(ops.append_col(xr, sr), ops.append_col(xd, sd))


def _rule_add_row(args, aux):
    x, b = args
    xr, xd = _parts(x)
    br, bd = _parts(b)
    re = ops.add_row(xr, br)
    if bd is None:
        du = xd
    elif xd is None:
        du = ops.row_to_full(bd, ops.shape_of(ops.peek(xr))[0])
    else:
        du = ops.add_row(xd, bd)
    return Dual(re, du)


def _attach_rules():
    P = ops.PRIMS
    P["add"].dual = _rule_add
    P["sub"].dual = _rule_sub
    P["div"].dual = _rule_div
    P["shift"].dual = _rule_shift
    P["exp"].dual = _rule_exp
    P["log"].dual = _rule_log
    P["sin"].dual = _rule_sin
    P["cos"].dual = _rule_cos
    P["tanh"].dual = _rule_tanh
    P["square"].dual = _rule_square
    P["tanh_grad_mul"].dual = _rule_tanh_grad_mul
    P["lincomb"].dual = _rule_lincomb
    P["concat_scalar"].dual = _rule_concat_scalar
    P["append_col"].dual = _rule_append_col
    P["add_row"].dual = _rule_add_row

    for name, op in (("mul", ops.mul), ("smul", ops.smul), ("dot", ops.dot),
                     ("matvec", ops.matvec), ("matvec_t", ops.matvec_t),
                     ("outer", ops.outer), ("linear", ops.linear),
                     ("matmul_nn", ops.matmul_nn), ("matmul_tn", ops.matmul_tn)):
        P[name].dual = _bilinear_dual(op)

    for name in ("neg", "scale", "sdiv", "colsum", "rowsum", "col_to_full",
                 "row_to_full", "slice_cols", "pad_cols", "sum_all",
                 "take_last", "pad_last", "bcast_full"):
        P[name].dual = _linear_unary_dual(P[name])


_attach_rules()


def _extract(y, k: int, depth: int):
    """Pick the k-th derivative out of a depth-nested evaluation."""
    v = y
    need = k
    for _ in range(depth):
        if type(v) is Dual:
            if need:
                v = v.du
                need -= 1
            else:
                v = v.re
        elif need:
            return _zero_coef(v)
    if need:
        return _zero_coef(v)
    return v


def nested_derivatives(g, t: float, order: int) -> list:
    """[g(t), g'(t), ..., g^(order)(t)] by repeated first-order lifting."""
    x = float(t)
    for _ in range(order):
        x = Dual(x, 1.0)
    y = g(x)
    return [_extract(y, k, order) for k in range(order + 1)]


def nested_jet(f, x0, series) -> list:
    """Oracle twin of :func:`odejet.jet.jet`.

    Evaluates f on the Taylor polynomial of the input via nested duals and
    returns derivative coefficients [y_0, ..., y_K].  Independent of the
    series recurrences by construction.
    """
    order = len(series)
    coeffs = [x0] + [ops.sdiv(s, factorial(i + 1)) if i else s
                     for i, s in enumerate(series)]

    def g(t):
        acc = coeffs[order]
        for i in range(order - 1, -1, -1):
            acc = ops.add(coeffs[i], ops.smul(t, acc))
        return f(acc)

    return nested_derivatives(g, 0.0, order)


def nested_opcount(f, x0, order: int, series=None) -> int:
    """Scalar operations for the nested-oracle evaluation at this order."""
    x0 = ops.as_tensor(x0) if not isinstance(x0, (int, float)) else float(x0)
    if series is None:
        shp = ops.shape_of(x0)
        series = [np.ones(shp) if shp else 1.0 for _ in range(order)]
    with OpCounter() as c:
        if order == 0:
            f(x0)
        else:
            nested_jet(f, x0, series)
    return c.total
