"""Scalar-operation counting for cost-scaling measurements.

An ``OpCounter`` is a context manager; while active, every primitive that
executes real arithmetic reports its scalar-operation cost (one unit per
element for elementwise work, ``2*m*n`` for an (m, n) matrix-vector
product, and so on — data movement such as slicing and concatenation is
free).  Counters nest and stack per thread; each counter only sees work
performed while it is open, so concurrent measurements in different
threads do not interfere.
"""

from __future__ import annotations

import threading

_ACTIVE = threading.local()


def _stack():
    s = getattr(_ACTIVE, "stack", None)
    if s is None:
        s = []
        _ACTIVE.stack = s
    return s


def emit(n: int) -> None:
    """Charge n scalar operations to every open counter (hot path)."""
    for c in _ACTIVE.stack:
        c.total += n


def counting() -> bool:
    s = getattr(_ACTIVE, "stack", None)
    return bool(s)


class OpCounter:
    """Accumulates scalar-operation counts while open."""

    __slots__ = ("total",)

    def __init__(self):
        self.total = 0

    def __enter__(self) -> "OpCounter":
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.stack.pop()
