"""Immutable expression trees.

Every node is a frozen dataclass, so trees compare structurally with ``==``
and can be shared freely between threads. Arithmetic operators on nodes build
new (unsimplified) trees, which keeps hand-written formulas readable::

    >>> u, x = Var("u"), Var("x")
    >>> 3 * u**2 - x
    Sub(left=Mul(left=Const(...), ...), ...)
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

# name -> arity
KNOWN_FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sec": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "atan": 1,
    "atan2": 2,
}

IMAGINARY_UNIT = "i"

# placeholder argument of uninterpreted-function instantiations, e.g. w(t) = 1 + t + t^2
FUNC_ARG = "t"


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        from .printer import to_string

        return to_string(self)


def _fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    """Exact complex rational constant ``re + i*im``."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _fraction(self.re))
        object.__setattr__(self, "im", _fraction(self.im))

    @property
    def value(self) -> complex:
        return complex(float(self.re), float(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0

    def is_integer(self) -> bool:
        return self.im == 0 and self.re.denominator == 1


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Call(Expr):
    """Known elementary function applied to its arguments."""

    name: str
    args: tuple

    def __post_init__(self):
        if self.name not in KNOWN_FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != KNOWN_FUNCTIONS[self.name]:
            raise ValueError(f"{self.name} takes {KNOWN_FUNCTIONS[self.name]} argument(s)")


@dataclass(frozen=True, slots=True)
class UFunc(Expr):
    """Uninterpreted function symbol ``name^(order)(arg)``."""

    name: str
    arg: Expr
    order: int = 0

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 0:
            raise ValueError("derivative order must be a non-negative integer")


BINARY = (Add, Sub, Mul, Div, Pow)

ZERO = Const(0)
ONE = Const(1)
I = Const(0, 1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, complex):
        return Const(Fraction(value.real), Fraction(value.imag))
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, Number):
        return Const(Fraction(float(value)))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def sin(a):
    return Call("sin", (as_expr(a),))


def cos(a):
    return Call("cos", (as_expr(a),))


def tan(a):
    return Call("tan", (as_expr(a),))


def sec(a):
    return Call("sec", (as_expr(a),))


def exp(a):
    return Call("exp", (as_expr(a),))


def log(a):
    return Call("log", (as_expr(a),))


def sqrt(a):
    return Call("sqrt", (as_expr(a),))


def atan(a):
    return Call("atan", (as_expr(a),))


def atan2(a, b):
    return Call("atan2", (as_expr(a), as_expr(b)))
