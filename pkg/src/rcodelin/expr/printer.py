"""Render trees in the input grammar so that ``parse(to_string(e)) == e``."""
from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Call, Const, Div, Mul, Neg, Pow, Sub, UFunc, Var

# binding strength, loosest first
_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = range(1, 6)


def terminating_decimal(q: Fraction) -> str | None:
    """Exact decimal string for a non-negative rational, or None if it repeats."""
    if q < 0:
        return None
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    places = max(twos, fives)
    scaled = q.numerator * 10**places // q.denominator
    if places == 0:
        return str(scaled)
    digits = str(scaled).rjust(places + 1, "0")
    return digits[:-places] + "." + digits[-places:]


def is_literal(c: Const) -> bool:
    """True for constants the parser produces directly: decimals >= 0 and ``i``."""
    if c.im == 0:
        return terminating_decimal(c.re) is not None
    return c.re == 0 and c.im == 1


def _real_tree(q: Fraction):
    if q < 0:
        return Neg(_real_tree(-q))
    if terminating_decimal(q) is not None:
        return Const(q)
    return Div(Const(q.numerator), Const(q.denominator))


def literal_tree(c: Const):
    """Equivalent tree built only from literal constants, Neg, Div, Mul and Add/Sub."""
    if is_literal(c):
        return c
    if c.im == 0:
        return _real_tree(c.re)
    if c.im == 1:
        imag = Const(0, 1)
    elif c.im == -1:
        imag = Neg(Const(0, 1))
    elif c.im < 0:
        imag = Neg(Mul(_real_tree(-c.im), Const(0, 1)))
    else:
        imag = Mul(_real_tree(c.im), Const(0, 1))
    if c.re == 0:
        return imag
    real = _real_tree(c.re)
    if isinstance(imag, Neg):
        return Sub(real, imag.arg)
    return Add(real, imag)


def _strength(e) -> int:
    if isinstance(e, (Add, Sub)):
        return _SUM
    if isinstance(e, (Mul, Div)):
        return _PRODUCT
    if isinstance(e, Neg):
        return _UNARY
    if isinstance(e, Pow):
        return _POWER
    if isinstance(e, Const) and not is_literal(e):
        return _strength(literal_tree(e))
    return _ATOM


def _wrap(e, minimum: int) -> str:
    text = to_string(e)
    return text if _strength(e) >= minimum else f"({text})"


def ufunc_identifier(name: str, order: int) -> str:
    return name if order == 0 else f"{name}__{order}"


def to_string(e) -> str:
    if isinstance(e, Const):
        if not is_literal(e):
            return to_string(literal_tree(e))
        if e.im == 1:
            return "i"
        return terminating_decimal(e.re)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _POWER)
    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        return _wrap(e.left, _SUM) + op + _wrap(e.right, _PRODUCT)
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return _wrap(e.left, _PRODUCT) + op + _wrap(e.right, _UNARY)
    if isinstance(e, Pow):
        return _wrap(e.left, _ATOM) + "^" + _wrap(e.right, _UNARY)
    if isinstance(e, Call):
        return e.name + "(" + ", ".join(to_string(a) for a in e.args) + ")"
    if isinstance(e, UFunc):
        return ufunc_identifier(e.name, e.order) + "(" + to_string(e.arg) + ")"
    raise TypeError(f"not an expression: {e!r}")
