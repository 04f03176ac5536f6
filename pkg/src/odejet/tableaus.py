"""Explicit Runge-Kutta tableaus and their order-condition validation.

Four built-in methods cover the experiment grid: an order-2 pair (Heun
with embedded Euler), the order-3(2) Bogacki-Shampine pair, the order-5(4)
Dormand-Prince pair, and classical fixed-step RK4.  Construction checks
the structural invariants (strictly lower-triangular ``a``, ``c_i = sum_j
a_ij``, ``sum b = 1``) and the full rooted-tree order conditions up to the
claimed order of each weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import OdejetError

# Order conditions as (elementary weight, 1/gamma) pairs per order.  The
# weight is a function of (b, a, c) with A the strictly-lower matrix.
_CONDITIONS = {
    1: [(lambda b, a, c: b @ np.ones_like(c), 1.0)],
    2: [(lambda b, a, c: b @ c, 1 / 2)],
    3: [
        (lambda b, a, c: b @ c**2, 1 / 3),
        (lambda b, a, c: b @ (a @ c), 1 / 6),
    ],
    4: [
        (lambda b, a, c: b @ c**3, 1 / 4),
        (lambda b, a, c: b @ (c * (a @ c)), 1 / 8),
        (lambda b, a, c: b @ (a @ c**2), 1 / 12),
        (lambda b, a, c: b @ (a @ (a @ c)), 1 / 24),
    ],
    5: [
        (lambda b, a, c: b @ c**4, 1 / 5),
        (lambda b, a, c: b @ (c**2 * (a @ c)), 1 / 10),
        (lambda b, a, c: b @ (c * (a @ c**2)), 1 / 15),
        (lambda b, a, c: b @ (c * (a @ (a @ c))), 1 / 30),
        (lambda b, a, c: b @ (a @ c) ** 2, 1 / 20),
        (lambda b, a, c: b @ (a @ c**3), 1 / 20),
        (lambda b, a, c: b @ (a @ (c * (a @ c))), 1 / 40),
        (lambda b, a, c: b @ (a @ (a @ c**2)), 1 / 60),
        (lambda b, a, c: b @ (a @ (a @ (a @ c))), 1 / 120),
    ],
}


def order_condition_residual(b, a, c, order: int) -> float:
    """Largest residual over all rooted-tree conditions up to ``order``."""
    worst = 0.0
    for p in range(1, order + 1):
        for weight, rhs in _CONDITIONS[p]:
            worst = max(worst, abs(float(weight(b, a, c)) - rhs))
    return worst


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients of an explicit Runge-Kutta method.

    ``b_err`` holds the embedded lower-order weights when the method
    supports error estimation; ``embedded_order`` is the order of that
    embedded weight vector (the exponent the step controller uses).
    """

    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    b_err: np.ndarray | None = None
    embedded_order: int | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        s = a.shape[0]
        if a.shape != (s, s) or self.b.shape != (s,) or self.c.shape != (s,):
            raise OdejetError(f"{self.name}: inconsistent tableau shapes")
        if np.any(np.triu(a) != 0.0):
            raise OdejetError(f"{self.name}: a must be strictly lower triangular")
        if not np.allclose(a.sum(axis=1), self.c, atol=1e-13):
            raise OdejetError(f"{self.name}: row sums of a must equal c")
        if abs(self.b.sum() - 1.0) > 1e-13:
            raise OdejetError(f"{self.name}: b must sum to 1")
        res = order_condition_residual(self.b, a, self.c, self.order)
        if res > 1e-12:
            raise OdejetError(
                f"{self.name}: order-{self.order} conditions violated ({res:.2e})")
        if self.b_err is not None:
            res = order_condition_residual(self.b_err, a, self.c,
                                           self.embedded_order)
            if res > 1e-12:
                raise OdejetError(
                    f"{self.name}: embedded order-{self.embedded_order} "
                    f"conditions violated ({res:.2e})")

    @property
    def stages(self) -> int:
        return self.b.shape[0]

    @property
    def adaptive(self) -> bool:
        return self.b_err is not None


@lru_cache(maxsize=1)
def builtin_tableaus() -> dict[str, ButcherTableau]:
    """The validated built-in methods, keyed by name."""
    heun = ButcherTableau(
        name="heun21",
        a=np.array([[0.0, 0.0], [1.0, 0.0]]),
        b=np.array([0.5, 0.5]),
        c=np.array([0.0, 1.0]),
        order=2,
        b_err=np.array([1.0, 0.0]),
        embedded_order=1,
    )

    bs = ButcherTableau(
        name="bogacki_shampine32",
        a=np.array([
            [0.0, 0.0, 0.0, 0.0],
            [1 / 2, 0.0, 0.0, 0.0],
            [0.0, 3 / 4, 0.0, 0.0],
            [2 / 9, 1 / 3, 4 / 9, 0.0],
        ]),
        b=np.array([2 / 9, 1 / 3, 4 / 9, 0.0]),
        c=np.array([0.0, 1 / 2, 3 / 4, 1.0]),
        order=3,
        b_err=np.array([7 / 24, 1 / 4, 1 / 3, 1 / 8]),
        embedded_order=2,
    )

    dp = ButcherTableau(
        name="dormand_prince54",
        a=np.array([
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0, 0.0],
            [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0, 0.0],
            [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0, 0.0],
            [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0, 0.0],
            [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
        ]),
        b=np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                    11 / 84, 0.0]),
        c=np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]),
        order=5,
        b_err=np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                        -92097 / 339200, 187 / 2100, 1 / 40]),
        embedded_order=4,
    )

    rk4 = ButcherTableau(
        name="rk4_fixed",
        a=np.array([
            [0.0, 0.0, 0.0, 0.0],
            [1 / 2, 0.0, 0.0, 0.0],
            [0.0, 1 / 2, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]),
        b=np.array([1 / 6, 1 / 3, 1 / 3, 1 / 6]),
        c=np.array([0.0, 1 / 2, 1 / 2, 1.0]),
        order=4,
    )

    return {t.name: t for t in (heun, bs, dp, rk4)}


def tableau_by_order(order: int) -> ButcherTableau:
    """The adaptive built-in of a given order (2, 3, or 5)."""
    by_order = {2: "heun21", 3: "bogacki_shampine32", 5: "dormand_prince54"}
    if order not in by_order:
        raise OdejetError(f"no adaptive built-in tableau of order {order}")
    return builtin_tableaus()[by_order[order]]
