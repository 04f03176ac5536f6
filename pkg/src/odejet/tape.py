"""Tape-based reverse-mode differentiation.

Applying a primitive to any :class:`Var` appends a node to that variable's
:class:`Tape`: primitive, input node ids, aux constants, and the computed
value.  Plain operands are materialized as unnamed constant leaves so every
node's inputs are node ids and the tape can be replayed from its own
contents, bit-exactly, without outside state.

``backward`` runs one reverse sweep over the recorded range applying each
primitive's reverse partials.  The sweep visits nodes in strictly
decreasing id order (reverse topological, since inputs always precede
consumers) and accumulates cotangents with ``add`` in input-slot order, so
gradient floats are reproducible run to run.

``vjp`` reuses the same sweep.  When its inputs are themselves ``Var``s on
a live tape, the sweep applies the reverse partials *symbolically*: rule
arithmetic dispatches on ``Var`` operands and lands back on the tape, so a
vector-Jacobian product becomes an ordinary differentiable subgraph.  That
is how gradient-of-VJP quantities are trained without any second
reverse-over-reverse machinery.

Concurrency: a tape has a single writer; independent tapes may be built
and swept concurrently.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .errors import OdejetError, ShapeError
from .opcount import counting, emit
from .ops import Arith, as_tensor, peek, plain_eval, run_vjp_rule


class Var(Arith):
    """Handle to one tape node; supports the full primitive registry."""

    __slots__ = ("tape", "i")
    _carrier_level = 1

    def __init__(self, tape: "Tape", i: int):
        self.tape = tape
        self.i = i

    @property
    def value(self):
        return self.tape._values[self.i]

    @property
    def shape(self):
        v = self.tape._values[self.i]
        return v.shape if isinstance(v, np.ndarray) else ()

    def __repr__(self):
        return f"Var(node={self.i}, value={self.value!r})"


class Tape:
    """Append-only record of primitive applications."""

    __slots__ = ("_prims", "_inputs", "_aux", "_values", "_needs", "_names")

    def __init__(self):
        self._prims: list = []     # Prim, or None for leaves
        self._inputs: list = []    # tuple[int, ...]
        self._aux: list = []       # tuple
        self._values: list = []
        self._needs = bytearray()  # node reaches a named leaf
        self._names: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._prims)

    def leaf(self, value, name: str | None = None) -> Var:
        """New input node.  Named leaves are gradient targets."""
        if isinstance(value, np.ndarray) or not isinstance(value, (int, float)):
            value = as_tensor(value)
        else:
            value = float(value)
        i = len(self._prims)
        self._prims.append(None)
        self._inputs.append(())
        self._aux.append(())
        self._values.append(value)
        self._needs.append(1 if name is not None else 0)
        if name is not None:
            if name in self._names:
                raise OdejetError(f"duplicate leaf name {name!r}")
            self._names[name] = i
        return Var(self, i)

    def _const(self, value) -> int:
        i = len(self._prims)
        self._prims.append(None)
        self._inputs.append(())
        self._aux.append(())
        self._values.append(value)
        self._needs.append(0)
        return i

    def node_count(self) -> int:
        return len(self._prims)

    def value(self, i: int):
        return self._values[i]

    def replay(self) -> list[int]:
        """Re-execute every recorded primitive; return ids whose recomputed
        value differs from the stored one (empty list = bit-exact replay)."""
        bad = []
        for i, prim in enumerate(self._prims):
            if prim is None:
                continue
            vals = tuple(self._values[j] for j in self._inputs[i])
            got = plain_eval(prim, vals, self._aux[i])
            want = self._values[i]
            if isinstance(want, np.ndarray):
                same = isinstance(got, np.ndarray) and got.shape == want.shape \
                    and np.array_equal(got, want)
            else:
                same = got == want
            if not same:
                bad.append(i)
        return bad


def _tape_apply(prim, args, aux):
    tape = None
    for a in args:
        if type(a) is Var:
            if tape is None:
                tape = a.tape
            elif a.tape is not tape:
                raise OdejetError(
                    f"primitive '{prim.name}' mixes variables from two tapes"
                )
    ids = []
    vals = []
    needs = 0
    tneeds = tape._needs
    for a in args:
        if type(a) is Var:
            ids.append(a.i)
            vals.append(tape._values[a.i])
            if tneeds[a.i]:
                needs = 1
        else:
            ids.append(tape._const(a))
            vals.append(a)
    if counting():
        emit(prim.flops(vals, aux))
    out = prim.impl(tuple(vals), aux)
    i = len(tape._prims)
    tape._prims.append(prim)
    tape._inputs.append(tuple(ids))
    tape._aux.append(aux)
    tape._values.append(out)
    tape._needs.append(needs)
    return Var(tape, i)


ops._TAPE_APPLY = _tape_apply


class Gradients:
    """Gradients keyed by parameter name.

    Parameters that were registered (named leaves) but not reached by the
    backward sweep hold exact zeros; unknown names raise ``KeyError``.
    """

    __slots__ = ("_data",)

    def __init__(self, data: dict):
        self._data = data

    def __getitem__(self, name: str):
        return self._data[name]

    def __contains__(self, name: str) -> bool:
        return name in self._data

    def keys(self):
        return self._data.keys()

    def items(self):
        return self._data.items()

    def __repr__(self):
        return f"Gradients({sorted(self._data)})"


def _sweep(tape: Tape, lo: int, hi: int, seeds: dict, wrap: bool,
           keep=None) -> dict:
    """Reverse sweep over tape nodes in [lo, hi).

    ``seeds`` maps node id -> cotangent.  With ``wrap`` the rule arguments
    are ``Var`` handles, so the partials are recorded onto the same tape;
    otherwise stored plain values are used.  ``keep(j)`` decides whether a
    cotangent flowing into node j is worth propagating (defaults to the
    reaches-a-named-leaf mask).  Returns the cotangents left at boundary
    nodes: leaves inside the range plus nodes below ``lo``.
    """
    cots = dict(seeds)
    prims = tape._prims
    inputs = tape._inputs
    auxs = tape._aux
    values = tape._values
    if keep is None:
        needs = tape._needs
        keep = lambda j: needs[j]
    for i in range(hi - 1, lo - 1, -1):
        prim = prims[i]
        if prim is None:
            continue
        g = cots.pop(i, None)
        if g is None:
            continue
        ids = inputs[i]
        if wrap:
            vals = tuple(Var(tape, j) for j in ids)
            out = Var(tape, i)
        else:
            vals = tuple(values[j] for j in ids)
            out = values[i]
        parts = run_vjp_rule(prim, g, out, vals, auxs[i])
        for j, p in zip(ids, parts):
            if p is None or not keep(j):
                continue
            c = cots.get(j)
            cots[j] = p if c is None else ops.add(c, p)
    return cots


def _reaches_mask(tape: Tape, target: int, hi: int):
    """keep-predicate: nodes in [target, hi) whose input chain reaches target."""
    span = hi - target
    reach = bytearray(span)
    reach[0] = 1
    inputs = tape._inputs
    for j in range(target + 1, hi):
        for k in inputs[j]:
            if k >= target and reach[k - target]:
                reach[j - target] = 1
                break
    return lambda j: j >= target and j < hi and reach[j - target]


def _zeros_like_value(v):
    if isinstance(v, np.ndarray):
        return np.zeros_like(v)
    return 0.0


def record(f, args, names=None):
    """Run ``f`` over fresh leaves for ``args``; return (output, tape)."""
    tape = Tape()
    if names is None:
        names = [f"x{i}" for i in range(len(args))]
    leaves = [tape.leaf(a, name=n) for a, n in zip(args, names)]
    out = f(*leaves)
    return out, tape


def backward(tape: Tape, output: Var) -> Gradients:
    """Exact reverse-mode gradients of a scalar output w.r.t. named leaves."""
    if type(output) is not Var or output.tape is not tape:
        raise OdejetError("backward: output must be a Var recorded on this tape")
    val = output.value
    if isinstance(val, np.ndarray) and val.size != 1:
        raise ShapeError("backward(scalar output required)", val.shape)
    seed = 1.0 if not isinstance(val, np.ndarray) else np.ones_like(val)
    cots = _sweep(tape, 0, len(tape), {output.i: seed}, wrap=False)
    out = {}
    for name, i in tape._names.items():
        g = cots.get(i)
        if g is None:
            g = _zeros_like_value(tape._values[i])
        out[name] = g
    return Gradients(out)


def vjp(f, x, v):
    """Cotangent pullback v^T (df/dx) without materializing the Jacobian.

    ``x`` may be plain (returns a plain tensor) or a live ``Var``, in which
    case the result is a ``Var`` on the same tape and remains
    differentiable with respect to anything upstream of ``f``.
    """
    if type(x) is Var:
        tape = x.tape
        lo = len(tape)
        y = f(x)
        if type(y) is not Var:
            return _zeros_like_value(x.value)
        _check_cotangent(y.value, v)
        hi = len(tape)
        cots = _sweep(tape, lo, hi, {y.i: v}, wrap=True,
                      keep=_reaches_mask(tape, x.i, hi))
        g = cots.get(x.i)
        if g is None:
            return _zeros_like_value(x.value)
        return g
    tape = Tape()
    xv = tape.leaf(x, name="x")
    y = f(xv)
    if type(y) is not Var:
        return _zeros_like_value(tape._values[xv.i])
    _check_cotangent(y.value, v)
    cots = _sweep(tape, 0, len(tape), {y.i: peek(v)}, wrap=False)
    g = cots.get(xv.i)
    if g is None:
        return _zeros_like_value(tape._values[xv.i])
    return g


def _check_cotangent(yval, v):
    ys = yval.shape if isinstance(yval, np.ndarray) else ()
    vv = peek(v)
    vs = vv.shape if isinstance(vv, np.ndarray) else ()
    if ys != vs:
        raise ShapeError("vjp(cotangent)", ys, vs)
