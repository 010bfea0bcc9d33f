"""A deliberately small arithmetic interpreter for coefficient strings.

Grammar: numbers, ``x``, ``pi``, ``e``, binary ``+ - * / ^`` (``**`` is
accepted as ``^``), unary minus, parentheses, and the functions ``exp``,
``ln`` (alias ``log``) and ``sqrt``.  Nothing else is evaluated, so
config files cannot run code.

Expressions evaluate on floats or numpy arrays and carry a forward-mode
derivative, which the CLI uses to obtain quasi-derivatives of test
functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(\*\*|[-+*/^()])|([A-Za-z_]\w*))")
_FUNCS = {"exp", "ln", "log", "sqrt"}
_CONSTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()
    value: float = 0.0


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParameterError(f"unexpected character in expression {text!r} at position {pos}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParameterError(f"malformed expression {self.text!r}: expected {expected or 'a term'}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.sum()
        if self.peek() is not None:
            raise ParameterError(f"malformed expression {self.text!r}: trailing {self.peek()!r}")
        return node

    def sum(self):
        node = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            node = Node(op, (node, self.product()))
        return node

    def product(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            node = Node(op, (node, self.unary()))
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return Node("neg", (self.unary(),))
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() in ("^", "**"):
            self.take()
            return Node("^", (base, self.unary()))  # right associative
        return base

    def atom(self):
        tok = self.take()
        if tok == "(":
            node = self.sum()
            self.take(")")
            return node
        if tok[0].isdigit() or tok[0] == ".":
            return Node("num", value=float(tok))
        if tok == "x":
            return Node("x")
        if tok in _CONSTS:
            return Node("num", value=_CONSTS[tok])
        if tok in _FUNCS:
            self.take("(")
            arg = self.sum()
            self.take(")")
            return Node("ln" if tok == "log" else tok, (arg,))
        raise ParameterError(f"unknown name {tok!r} in expression {self.text!r}")


def _eval(node: Node, x, dx):
    """Return (value, derivative) of the tree at x."""
    op = node.op
    if op == "num":
        return node.value + 0 * x, 0 * x
    if op == "x":
        return x, dx
    if op == "neg":
        v, d = _eval(node.args[0], x, dx)
        return -v, -d
    if op in ("exp", "ln", "sqrt"):
        v, d = _eval(node.args[0], x, dx)
        if op == "exp":
            e = np.exp(v)
            return e, e * d
        if op == "ln":
            return np.log(v), d / v
        s = np.sqrt(v)
        return s, d / (2 * s)
    (u, du), (v, dv) = _eval(node.args[0], x, dx), _eval(node.args[1], x, dx)
    if op == "+":
        return u + v, du + dv
    if op == "-":
        return u - v, du - dv
    if op == "*":
        return u * v, du * v + u * dv
    if op == "/":
        return u / v, (du * v - u * dv) / (v * v)
    # power: constant exponent keeps negative bases legal
    if node.args[1].op == "num":
        k = node.args[1].value
        return u ** k, k * u ** (k - 1) * du if k != 0 else 0 * x
    w = u ** v
    return w, w * (dv * np.log(u) + v * du / u)


def _scalar_closure(node: Node):
    """Plain-float evaluator built from closures; used on the integrator's hot path."""
    op = node.op
    if op == "num":
        c = node.value
        return lambda x: c
    if op == "x":
        return lambda x: x
    if op == "neg":
        f = _scalar_closure(node.args[0])
        return lambda x: -f(x)
    if op in ("exp", "ln", "sqrt"):
        f = _scalar_closure(node.args[0])
        g = {"exp": math.exp, "ln": math.log, "sqrt": math.sqrt}[op]
        return lambda x: g(f(x))
    f, g = _scalar_closure(node.args[0]), _scalar_closure(node.args[1])
    if op == "+":
        return lambda x: f(x) + g(x)
    if op == "-":
        return lambda x: f(x) - g(x)
    if op == "*":
        return lambda x: f(x) * g(x)
    if op == "/":
        return lambda x: f(x) / g(x)
    if node.args[1].op == "num":
        k = node.args[1].value
        if k == int(k) and abs(k) <= 8:
            k = int(k)
        return lambda x: f(x) ** k
    return lambda x: f(x) ** g(x)


class Expression:
    """Compiled expression in the variable ``x``."""

    def __init__(self, text: str):
        self.text = str(text)
        self._tree = _Parser(self.text).parse()
        self._scalar = _scalar_closure(self._tree)

    def scalar(self, x: float) -> float:
        """Value at a single float; falls back to the array path on domain errors."""
        try:
            v = self._scalar(x)
        except (ValueError, ZeroDivisionError, OverflowError):
            return float(self(np.float64(x)))
        return math.nan if isinstance(v, complex) else float(v)

    def __call__(self, x):
        with np.errstate(all="ignore"):
            return _eval(self._tree, x, 1.0 + 0 * np.asarray(x, dtype=float))[0]

    def derivative(self, x):
        with np.errstate(all="ignore"):
            return _eval(self._tree, x, 1.0 + 0 * np.asarray(x, dtype=float))[1]

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and other.text == self.text

    def __hash__(self):
        return hash(self.text)
