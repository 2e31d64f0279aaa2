"""Small analytic expression trees for metric components and soliton potentials.

Expressions are built with ordinary Python operators on :class:`Expr` nodes
(``var("x") ** 2 + 1``) or parsed from strings with :func:`parse`.  The same
tree evaluates on floats, numpy arrays, or :class:`~ril.jets.Jet` values, which
is what lets a metric family feed both the jet engine and a plain-float
finite-difference oracle.

Grammar accepted by :func:`parse` (a subset of Python expression syntax)::

    expr   := expr ('+' | '-') term | term
    term   := term ('*' | '/') factor | factor
    factor := ('+' | '-') factor | atom ('**' | '^') factor | atom
    atom   := NUMBER | NAME | FUNC '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'

with ``FUNC`` one of ``exp log sin cos sqrt`` and ``NAME`` a coordinate or
parameter name; ``pi`` and ``e`` are predefined constants.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import jets
from .jets import Jet

__all__ = ["Expr", "Const", "Var", "ExprParseError", "var", "const", "parse", "FUNCTIONS"]


class ExprParseError(ValueError):
    """Malformed expression text; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


def _dispatch(jet_fn: Callable, np_fn: Callable) -> Callable:
    def apply(x):
        if isinstance(x, Jet):
            return jet_fn(x)
        return np_fn(x)

    return apply


def _np_log(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log of a non-positive value")
    return np.log(x)


def _np_sqrt(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("sqrt of a negative value")
    return np.sqrt(x)


FUNCTIONS: dict[str, Callable] = {
    "exp": _dispatch(jets.exp, np.exp),
    "log": _dispatch(jets.log, _np_log),
    "sin": _dispatch(jets.sin, np.sin),
    "cos": _dispatch(jets.cos, np.cos),
    "sqrt": _dispatch(jets.sqrt, _np_sqrt),
}

CONSTANTS = {"pi": math.pi, "e": math.e}


def _power(base, exponent):
    if isinstance(base, Jet):
        return jets.power(base, exponent)
    if isinstance(exponent, Jet):
        return jets.exp(exponent * math.log(base))
    return np.power(np.asarray(base, dtype=float), exponent)


def _wrap(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Const(float(value))
    raise TypeError(f"cannot use {type(value).__name__} in an expression")


class Expr:
    """Base node; subclasses implement :meth:`evaluate` and :meth:`__str__`."""

    def evaluate(self, env: Mapping[str, object]):
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def substitute(self, values: Mapping[str, float]) -> Expr:
        raise NotImplementedError

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Add(self, Neg(_wrap(other)))

    def __rsub__(self, other):
        return Add(_wrap(other), Neg(self))

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __rtruediv__(self, other):
        return Div(_wrap(other), self)

    def __pow__(self, other):
        return Pow(self, _wrap(other))

    def __rpow__(self, other):
        return Pow(_wrap(other), self)

    def __neg__(self):
        return Neg(self)

    def __repr__(self):
        return f"Expr({self})"


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expr):
    value: float

    def evaluate(self, env):
        return self.value

    def variables(self):
        return frozenset()

    def substitute(self, values):
        return self

    def __str__(self):
        return repr(self.value) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(Expr):
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise KeyError(f"unbound variable {self.name!r}") from None

    def variables(self):
        return frozenset([self.name])

    def substitute(self, values):
        if self.name in values:
            return Const(float(values[self.name]))
        return self

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True, repr=False)
class Neg(Expr):
    arg: Expr

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def variables(self):
        return self.arg.variables()

    def substitute(self, values):
        return Neg(self.arg.substitute(values))

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True, eq=True, repr=False)
class _Binary(Expr):
    left: Expr
    right: Expr
    symbol = "?"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def substitute(self, values):
        return type(self)(self.left.substitute(values), self.right.substitute(values))

    def __str__(self):
        return f"({self.left} {self.symbol} {self.right})"


class Add(_Binary):
    symbol = "+"

    def evaluate(self, env):
        return self.left.evaluate(env) + self.right.evaluate(env)


class Mul(_Binary):
    symbol = "*"

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        # keep the jet on the left so scalar broadcasting goes through Jet.__mul__
        return b * a if isinstance(b, Jet) and not isinstance(a, Jet) else a * b


class Div(_Binary):
    symbol = "/"

    def evaluate(self, env):
        return self.left.evaluate(env) / self.right.evaluate(env)


class Pow(_Binary):
    symbol = "**"

    def evaluate(self, env):
        return _power(self.left.evaluate(env), self.right.evaluate(env))


@dataclass(frozen=True, eq=True, repr=False)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def evaluate(self, env):
        return FUNCTIONS[self.name](self.arg.evaluate(env))

    def variables(self):
        return self.arg.variables()

    def substitute(self, values):
        return Func(self.name, self.arg.substitute(values))

    def __str__(self):
        return f"{self.name}({self.arg})"


def var(name: str) -> Var:
    return Var(name)


def const(value: float) -> Const:
    return Const(float(value))


def _make_func(name):
    def build(arg) -> Func:
        return Func(name, _wrap(arg))

    build.__name__ = name
    return build


exp = _make_func("exp")
log = _make_func("log")
sin = _make_func("sin")
cos = _make_func("cos")
sqrt = _make_func("sqrt")


# -- parsing -------------------------------------------------------------

_BINOPS = {ast.Add: Add, ast.Mult: Mul, ast.Div: Div, ast.Pow: Pow}


def parse(text: str, names: frozenset[str] | set[str] | None = None, *, line_offset: int = 0,
          column_offset: int = 0) -> Expr:
    """Parse ``text`` into an expression tree.

    ``names`` restricts the free variables allowed (coordinates plus
    parameters); ``None`` accepts any identifier.  Offsets shift the
    reported positions when the text was embedded in a larger file.
    """

    def fail(msg, node=None):
        line = getattr(node, "lineno", 1)
        col = getattr(node, "col_offset", 0) + 1
        if line == 1:
            col += column_offset
        raise ExprParseError(msg, line + line_offset, col)

    source = str(text).replace("^", "**")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as err:
        col = (err.offset or 1) + (column_offset if (err.lineno or 1) == 1 else 0)
        raise ExprParseError(f"syntax error: {err.msg}", (err.lineno or 1) + line_offset, col) from None

    def walk(node) -> Expr:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Const(float(node.value))
        if isinstance(node, ast.Name):
            if node.id in CONSTANTS:
                return Const(CONSTANTS[node.id])
            if names is not None and node.id not in names:
                fail(f"unknown name {node.id!r}", node)
            return Var(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = walk(node.operand)
            return Neg(inner) if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Sub):
                return Add(walk(node.left), Neg(walk(node.right)))
            cls = _BINOPS.get(type(node.op))
            if cls is None:
                fail(f"unsupported operator {type(node.op).__name__}", node)
            return cls(walk(node.left), walk(node.right))
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                fail("unsupported call syntax", node)
            fname = node.func.id
            if fname == "pow":
                if len(node.args) != 2:
                    fail("pow takes exactly two arguments", node)
                return Pow(walk(node.args[0]), walk(node.args[1]))
            if fname not in FUNCTIONS:
                fail(f"unknown function {fname!r}", node)
            if len(node.args) != 1:
                fail(f"{fname} takes exactly one argument", node)
            return Func(fname, walk(node.args[0]))
        fail(f"unsupported syntax {type(node).__name__}", node)

    return walk(tree.body)
