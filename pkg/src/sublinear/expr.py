"""Small arithmetic grammar for function specs given on the command line.

Accepted: numbers, variables ``x1 .. xn`` (``x`` is ``x1``), ``+ - * / **``,
unary minus, calls ``min(a, b, ...)``, ``max(a, b, ...)``, ``abs``, ``sin``,
``cos``, ``exp``, ``sqrt``, ``log``, the constants ``pi`` and ``e``, and the
bare aggregates ``max``, ``min``, ``mean``, ``median``, ``sum`` which act on
all coordinates. ``"2*mean"`` and ``"max(x1, x2) - x3"`` are both valid.

Python's own parser does the tokenizing; the tree is checked against a
whitelist and compiled into a numpy closure.
"""
from __future__ import annotations

import ast
import math
import re

import numpy as np

from .functions import BUILTINS, TestFunction, builtin

_VAR = re.compile(r"x(\d*)$")
_UNARY = {"abs": np.abs, "sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "log": np.log}
_VARIADIC = {"min": np.minimum, "max": np.maximum}
_CONSTS = {"pi": math.pi, "e": math.e}
_AGGREGATES = {
    "max": lambda x: np.max(x, axis=-1),
    "min": lambda x: np.min(x, axis=-1),
    "mean": lambda x: np.mean(x, axis=-1),
    "median": lambda x: np.median(x, axis=-1),
    "sum": lambda x: np.sum(x, axis=-1),
}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExpressionError(ValueError):
    """Malformed function expression."""


def _compile(node, state):
    if isinstance(node, ast.Expression):
        return _compile(node.body, state)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        c = float(node.value)
        return lambda x: c
    if isinstance(node, ast.Name):
        name = node.id
        m = _VAR.match(name)
        if m:
            idx = int(m.group(1) or 1)
            if idx < 1:
                raise ExpressionError(f"variable {name!r}: indices start at 1")
            state["max_var"] = max(state["max_var"], idx)
            return lambda x: x[..., idx - 1]
        if name in _CONSTS:
            c = _CONSTS[name]
            return lambda x: c
        if name in _AGGREGATES:
            state["aggregate"] = True
            return _AGGREGATES[name]
        raise ExpressionError(f"unknown name {name!r} at column {node.col_offset}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        lhs, rhs = _compile(node.left, state), _compile(node.right, state)
        return lambda x: op(lhs(x), rhs(x))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, state)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name = node.func.id
        args = [_compile(a, state) for a in node.args]
        if name in _UNARY:
            if len(args) != 1:
                raise ExpressionError(f"{name}() takes one argument")
            fn, (a,) = _UNARY[name], args
            return lambda x: fn(a(x))
        if name in _VARIADIC:
            if len(args) < 2:
                raise ExpressionError(f"{name}() needs at least two arguments; use bare '{name}' for all coordinates")
            fn = _VARIADIC[name]

            def reduce_(x, fn=fn, args=args):
                out = args[0](x)
                for a in args[1:]:
                    out = fn(out, a(x))
                return out

            return reduce_
        raise ExpressionError(f"unknown function {name!r} at column {node.col_offset}")
    raise ExpressionError(f"unsupported syntax {type(node).__name__!s} at column {getattr(node, 'col_offset', 0)}")


def parse_function(text: str, n: int | None = None) -> TestFunction:
    """Compile ``text`` into a :class:`TestFunction` of arity ``n``.

    ``n`` defaults to the largest variable index used. It is required when the
    expression uses an aggregate (``mean``, ``max`` ...) and names no variable.
    """
    text = text.strip()
    if not text:
        raise ExpressionError("empty expression")
    if text in BUILTINS:
        if n is None:
            raise ExpressionError(f"built-in {text!r} needs an explicit arity n")
        return builtin(text, n)
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None
    state = {"max_var": 0, "aggregate": False}
    body = _compile(tree, state)
    if n is None:
        if state["max_var"] == 0:
            if state["aggregate"]:
                raise ExpressionError(f"{text!r} uses an aggregate; arity n must be given")
            n = 1
        else:
            n = state["max_var"]
    if n < state["max_var"]:
        raise ExpressionError(f"{text!r} uses x{state['max_var']} but arity is {n}")
    if n < 1:
        raise ExpressionError("arity must be positive")

    def func(x, body=body):
        with np.errstate(all="ignore"):
            return body(x)

    return TestFunction(func, n, text)
