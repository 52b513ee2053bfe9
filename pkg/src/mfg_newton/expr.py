"""Tiny arithmetic expression compiler for config-defined problem data.

Accepts only +, -, *, /, ** (or pow), sin, cos, min, abs, numeric constants,
pi, and the variables x1, x2, m. Anything else is rejected at compile time, so
config files cannot smuggle in arbitrary code.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

_ALLOWED_VARS = ("x1", "x2", "m")

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}

_CALLS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
    "min": np.minimum,
    "pow": np.power,
}

_CALL_ARITY = {"sin": (1,), "cos": (1,), "abs": (1,), "min": (2,), "pow": (2,)}


def _check(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ValueError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left)
        _check(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ValueError(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _CALLS:
            raise ValueError("only sin, cos, min, abs, pow calls are allowed")
        if node.keywords:
            raise ValueError("keyword arguments not allowed")
        if len(node.args) not in _CALL_ARITY[node.func.id]:
            raise ValueError(f"{node.func.id} takes {_CALL_ARITY[node.func.id][0]} arguments")
        for a in node.args:
            _check(a)
    elif isinstance(node, ast.Name):
        if node.id not in _ALLOWED_VARS and node.id != "pi":
            raise ValueError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ValueError(f"constant {node.value!r} not allowed")
    else:
        raise ValueError(f"syntax {type(node).__name__} not allowed")


def _eval(node: ast.AST, env: dict[str, np.ndarray]):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        val = _eval(node.operand, env)
        return -val if isinstance(node.op, ast.USub) else +val
    if isinstance(node, ast.Call):
        return _CALLS[node.func.id](*[_eval(a, env) for a in node.args])
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return np.pi
        if node.id not in env:
            raise ValueError(f"expression needs variable {node.id!r} which was not supplied")
        return env[node.id]
    if isinstance(node, ast.Constant):
        return float(node.value)
    raise ValueError(f"syntax {type(node).__name__} not allowed")


def compile_expression(text: str):
    """Compile an expression string to a keyword-argument vector function.

    The returned callable accepts any of x1, x2, m as numpy arrays and
    broadcasts. Raises ValueError at compile time for disallowed syntax and
    at call time if a required variable is missing.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression: {exc}") from exc
    _check(tree)

    def fn(**kwargs):
        env = {k: np.asarray(v, dtype=float) for k, v in kwargs.items() if k in _ALLOWED_VARS}
        out = _eval(tree, env)
        return np.asarray(out, dtype=float)

    fn.source = text
    return fn
