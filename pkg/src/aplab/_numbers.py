"""Arithmetic literals accepted in config and spec files.

Numbers may be written as plain YAML numbers or as short arithmetic strings
such as ``"2*pi/600"`` or ``"sqrt(2)"``.  Only literals, ``pi``, ``e``,
``inf``, ``sqrt`` and the operators ``+ - * / **`` are allowed.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction

_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_FUNCS = {"sqrt": math.sqrt}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


def _eval(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")


def parse_number(value: object) -> float:
    """Return *value* as a float, evaluating arithmetic strings."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float, Fraction)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in ("inf", "+inf", "infinity", ".inf"):
            return math.inf
        try:
            return _eval(ast.parse(text, mode="eval"))
        except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ValueError(f"cannot parse number {value!r}: {exc}") from None
    raise ValueError(f"expected a number, got {value!r}")


def parse_exponent(value: object) -> Fraction | float:
    """Parse an exponent, keeping it exact when written as an integer or ratio.

    ``2``, ``"4/3"`` and ``Fraction(3, 2)`` stay rational; ``"inf"`` becomes
    ``math.inf``; anything else falls back to float.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected an exponent, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in ("inf", "+inf", "infinity", ".inf"):
            return math.inf
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            return parse_number(text)
    if isinstance(value, float):
        return value
    raise ValueError(f"expected an exponent, got {value!r}")
