"""Periodic mass and frequency schedules built from a tiny expression grammar.

The grammar accepts numbers, the variable ``t``, the constant ``pi``, the
binary operators ``+ - * /``, unary minus, parentheses and the functions
``cos``, ``sin`` and ``pow(base, exponent)``. Nothing else is evaluated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ScheduleError

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(.))")
_FUNCS = {"cos": (np.cos, 1), "sin": (np.sin, 1), "pow": (np.power, 2)}
_CONSTS = {"pi": math.pi}


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ScheduleError(f"cannot tokenize {text!r} at {pos}")
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", float(num)))
        elif name is not None:
            tokens.append(("name", name))
        elif op.strip():
            if op not in "+-*/(),":
                raise ScheduleError(f"unexpected character {op!r} in {text!r}")
            tokens.append(("op", op))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ScheduleError(f"syntax error in {self.text!r} near token {self.i}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.i != len(self.tokens):
            raise ScheduleError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "name":
            self.take()
            if value == "t":
                return ("t",)
            if value in _CONSTS:
                return ("num", _CONSTS[value])
            if value in _FUNCS:
                self.take("op", "(")
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.take("op", ")")
                if len(args) != _FUNCS[value][1]:
                    raise ScheduleError(f"{value} expects {_FUNCS[value][1]} argument(s)")
                return ("call", value, args)
            raise ScheduleError(f"unknown name {value!r} in {self.text!r}")
        if (kind, value) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ScheduleError(f"syntax error in {self.text!r}")


def _evaluate(node, t):
    tag = node[0]
    if tag == "num":
        return node[1] + 0.0 * t
    if tag == "t":
        return t
    if tag == "neg":
        return -_evaluate(node[1], t)
    if tag == "call":
        fn = _FUNCS[node[1]][0]
        return fn(*[_evaluate(a, t) for a in node[2]])
    a, b = _evaluate(node[1], t), _evaluate(node[2], t)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    return a / b


def compile_expression(text: str) -> Callable:
    """Compile an expression string into a vectorized function of ``t``."""
    tree = _Parser(str(text)).parse()

    def fn(t):
        with np.errstate(all="ignore"):
            return _evaluate(tree, np.asarray(t, dtype=float))

    return fn


def evaluate_constant(text) -> float:
    """Evaluate an expression that must not depend on ``t`` (e.g. a period)."""
    if isinstance(text, (int, float)):
        return float(text)
    node = _Parser(str(text)).parse()

    def uses_t(n):
        if n[0] == "t":
            return True
        if n[0] == "call":
            return any(uses_t(a) for a in n[2])
        return any(uses_t(c) for c in n[1:] if isinstance(c, tuple))

    if uses_t(node):
        raise ScheduleError(f"{text!r} must be a constant")
    return float(_evaluate(node, np.asarray(0.0)))


@dataclass(frozen=True)
class ParameterSchedule:
    """Periodic mass ``M(t)`` and squared frequency ``w2(t)`` with period ``tau``."""

    M_expr: str
    w2_expr: str
    tau: float
    _M: Callable = field(init=False, repr=False, compare=False)
    _w2: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tau = evaluate_constant(self.tau)
        if not (np.isfinite(tau) and tau > 0):
            raise ScheduleError(f"period must be positive, got {self.tau!r}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "_M", compile_expression(self.M_expr))
        object.__setattr__(self, "_w2", compile_expression(self.w2_expr))

    @classmethod
    def constant(cls, M=1.0, w2=1.0, tau=2 * math.pi):
        return cls(repr(float(M)), repr(float(w2)), tau)

    def M(self, t):
        out = self._M(t)
        if not np.all(np.isfinite(out)):
            raise ScheduleError(f"M(t) is not finite for {self.M_expr!r}")
        return out

    def w2(self, t):
        out = self._w2(t)
        if not np.all(np.isfinite(out)):
            raise ScheduleError(f"w2(t) is not finite for {self.w2_expr!r}")
        return out

    def validate(self, samples: int = 257, rtol: float = 1e-10):
        """Check positivity of ``M`` and ``tau``-periodicity of both functions."""
        t = np.linspace(0.0, self.tau, samples)
        M = self.M(t)
        if np.any(M <= 0):
            raise ScheduleError("M(t) must be positive")
        for name, fn in (("M", self.M), ("w2", self.w2)):
            a, b = fn(t), fn(t + self.tau)
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.max(np.abs(a - b)) > rtol * scale:
                raise ScheduleError(f"{name}(t) is not periodic with period {self.tau}")
        return self

    def to_dict(self):
        return {"M": self.M_expr, "w2": self.w2_expr, "tau": self.tau}
