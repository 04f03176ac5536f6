"""Butcher tableau invariants and order conditions."""

import numpy as np
import pytest

from odejet.errors import OdejetError
from odejet.tableaus import (ButcherTableau, builtin_tableaus,
                             order_condition_residual, tableau_by_order)


class TestBuiltins:
    def test_expected_set(self):
        tabs = builtin_tableaus()
        assert set(tabs) == {"heun21", "bogacki_shampine32",
                             "dormand_prince54", "rk4_fixed"}
        assert tabs["heun21"].order == 2
        assert tabs["bogacki_shampine32"].order == 3
        assert tabs["dormand_prince54"].order == 5
        assert tabs["rk4_fixed"].order == 4
        assert not tabs["rk4_fixed"].adaptive

    def test_row_sums_equal_c(self):
        for tab in builtin_tableaus().values():
            assert np.allclose(tab.a.sum(axis=1), tab.c, atol=1e-14)

    def test_weights_sum_to_one(self):
        for tab in builtin_tableaus().values():
            assert abs(tab.b.sum() - 1.0) < 1e-13
            if tab.b_err is not None:
                assert abs(tab.b_err.sum() - 1.0) < 1e-13

    def test_order_conditions_to_stated_order(self):
        for tab in builtin_tableaus().values():
            res = order_condition_residual(tab.b, tab.a, tab.c, tab.order)
            assert res < 1e-12, (tab.name, res)

    def test_embedded_weights_are_strictly_lower_order(self):
        tabs = builtin_tableaus()
        for name in ("heun21", "bogacki_shampine32", "dormand_prince54"):
            tab = tabs[name]
            res = order_condition_residual(tab.b_err, tab.a, tab.c,
                                           tab.embedded_order)
            assert res < 1e-12
            res_next = order_condition_residual(tab.b_err, tab.a, tab.c,
                                                tab.embedded_order + 1)
            assert res_next > 1e-4, (name, res_next)

    def test_by_order(self):
        assert tableau_by_order(2).name == "heun21"
        assert tableau_by_order(5).name == "dormand_prince54"
        with pytest.raises(OdejetError):
            tableau_by_order(4)


class TestValidation:
    def test_rejects_upper_triangular(self):
        with pytest.raises(OdejetError):
            ButcherTableau(name="bad", a=np.array([[0.0, 0.5], [0.5, 0.0]]),
                           b=np.array([0.5, 0.5]), c=np.array([0.5, 0.5]),
                           order=1)

    def test_rejects_inconsistent_c(self):
        with pytest.raises(OdejetError):
            ButcherTableau(name="bad", a=np.array([[0.0, 0.0], [1.0, 0.0]]),
                           b=np.array([0.5, 0.5]), c=np.array([0.0, 0.5]),
                           order=2)

    def test_rejects_wrong_order_claim(self):
        # explicit Euler is order 1, not 2
        with pytest.raises(OdejetError):
            ButcherTableau(name="bad", a=np.zeros((1, 1)),
                           b=np.array([1.0]), c=np.array([0.0]), order=2)
