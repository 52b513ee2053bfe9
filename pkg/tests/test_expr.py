"""Whitelist arithmetic expression compiler used for config-defined problems."""

from __future__ import annotations

import numpy as np
import pytest

from mfg_newton.expr import compile_expression


class TestCompile:
    def test_arithmetic(self):
        f = compile_expression("2*x1 + 3 - 1/2")
        assert f(x1=np.array([1.0]))[0] == pytest.approx(4.5)

    def test_pow_operator_and_call(self):
        f = compile_expression("x1**2")
        g = compile_expression("pow(x1, 2)")
        x = np.array([3.0])
        assert f(x1=x)[0] == pytest.approx(9.0)
        assert g(x1=x)[0] == pytest.approx(9.0)

    def test_functions(self):
        f = compile_expression("sin(2*pi*x1) + cos(pi*x1)")
        out = f(x1=np.array([0.25]))
        assert out[0] == pytest.approx(1.0 + np.cos(np.pi / 4))

    def test_min_two_args(self):
        f = compile_expression("4*min(4, m)")
        out = f(m=np.array([2.0, 10.0]))
        np.testing.assert_allclose(out, [8.0, 16.0])

    def test_abs_and_unary_minus(self):
        f = compile_expression("abs(-x1) - -1")
        assert f(x1=np.array([2.0]))[0] == pytest.approx(3.0)

    def test_two_variables(self):
        f = compile_expression("sin(2*pi*x1) + sin(2*pi*x2)")
        out = f(x1=np.array([0.25]), x2=np.array([0.25]))
        assert out[0] == pytest.approx(2.0)

    def test_broadcasts_over_arrays(self):
        f = compile_expression("m*m")
        m = np.linspace(0, 1, 5)
        np.testing.assert_allclose(f(m=m), m * m)


class TestRejection:
    @pytest.mark.parametrize(
        "bad",
        [
            "__import__('os')",
            "x1.real",
            "exp(x1)",
            "lambda: 1",
            "[1,2]",
            "x1 if m else x2",
            "y + 1",
            "x1 @ x1",
            "max(1, 2)",
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            compile_expression(bad)

    def test_unknown_variable_at_call(self):
        f = compile_expression("x2 + 1")
        with pytest.raises(ValueError):
            f(x1=np.array([0.0]))
