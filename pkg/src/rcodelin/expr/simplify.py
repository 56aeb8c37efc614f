"""Light-weight, semantics-preserving clean-up.

Only constant folding, 0/1 identities and sign collapsing are done here.
Deciding whether an expression is identically zero is left to numeric
sampling; nothing in this module tries to canonicalize.
"""
from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Call, Const, Div, Mul, Neg, Pow, Sub, UFunc, Var
from .printer import literal_tree

_MAX_FOLDED_POWER = 64


def _c_add(a: Const, b: Const) -> Const:
    return Const(a.re + b.re, a.im + b.im)


def _c_sub(a: Const, b: Const) -> Const:
    return Const(a.re - b.re, a.im - b.im)


def _c_mul(a: Const, b: Const) -> Const:
    return Const(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


def _c_div(a: Const, b: Const) -> Const:
    den = b.re * b.re + b.im * b.im
    return Const((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den)


def _c_pow(a: Const, n: int) -> Const:
    if n < 0:
        return _c_div(Const(1), _c_pow(a, -n))
    result = Const(1)
    base = a
    while n:
        if n & 1:
            result = _c_mul(result, base)
        base = _c_mul(base, base)
        n >>= 1
    return result


def _is_zero(e) -> bool:
    return isinstance(e, Const) and e.is_zero()


def _is_one(e) -> bool:
    return isinstance(e, Const) and e.is_one()


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.re, -a.im)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Mul) and isinstance(a.left, Const):
        return _mul(Const(-a.left.re, -a.left.im), a.right)
    return Neg(a)


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return _c_add(a, b)
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return _c_sub(a, b)
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    return Sub(a, b)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return _c_mul(a, b)
    if _is_zero(a) or _is_zero(b):
        return Const(0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const):
        if a.re == -1 and a.im == 0:
            return _neg(b)
        if isinstance(b, Mul) and isinstance(b.left, Const):
            return _mul(_c_mul(a, b.left), b.right)
        if isinstance(b, Neg):
            return _mul(Const(-a.re, -a.im), b.arg)
        if isinstance(b, Div) and isinstance(b.left, Const):
            return _div(_c_mul(a, b.left), b.right)
    return Mul(a, b)


def _div(a, b):
    if isinstance(a, Const) and isinstance(b, Const) and not b.is_zero():
        return _c_div(a, b)
    if _is_zero(a) and not _is_zero(b):
        return Const(0)
    if _is_one(b):
        return a
    return Div(a, b)


def _pow(a, b):
    if _is_zero(b):
        return Const(1)
    if _is_one(b):
        return a
    if _is_one(a):
        return Const(1)
    if isinstance(a, Const) and isinstance(b, Const) and b.is_integer():
        n = int(b.re)
        if abs(n) <= _MAX_FOLDED_POWER and not (n < 0 and a.is_zero()):
            return _c_pow(a, n)
    return Pow(a, b)


_BUILD = {Add: _add, Sub: _sub, Mul: _mul, Div: _div, Pow: _pow}


def _fold(e, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(e, (Const, Var)):
        out = e
    elif isinstance(e, Neg):
        out = _neg(_fold(e.arg, memo))
    elif type(e) in _BUILD:
        out = _BUILD[type(e)](_fold(e.left, memo), _fold(e.right, memo))
    elif isinstance(e, Call):
        out = Call(e.name, tuple(_fold(a, memo) for a in e.args))
    elif isinstance(e, UFunc):
        out = UFunc(e.name, _fold(e.arg, memo), e.order)
    else:
        raise TypeError(f"not an expression: {e!r}")
    memo[key] = (e, out)  # keep e alive so its id is not reused
    return out


def _literalize(e, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(e, Const):
        out = literal_tree(e)
    elif isinstance(e, Var):
        out = e
    elif isinstance(e, Neg):
        out = Neg(_literalize(e.arg, memo))
    elif type(e) in _BUILD:
        out = type(e)(_literalize(e.left, memo), _literalize(e.right, memo))
    elif isinstance(e, Call):
        out = Call(e.name, tuple(_literalize(a, memo) for a in e.args))
    else:
        out = UFunc(e.name, _literalize(e.arg, memo), e.order)
    memo[key] = (e, out)
    return out


def fold_constants(e):
    """Fold without re-expressing constants; result may hold arbitrary Const values."""
    return _fold(e, {})


def simplify_basic(e):
    """Constant folding, 0/1 identity elimination and nested-negation collapse.

    The result only contains constants the parser could itself produce, so it
    prints and re-parses to the same tree.
    """
    return _literalize(_fold(e, {}), {})


def const_value(e) -> Const | None:
    """Exact value of ``e`` if it folds to a constant."""
    out = fold_constants(e)
    return out if isinstance(out, Const) else None


def is_rational_integer(c: Const) -> bool:
    return c.im == 0 and c.re.denominator == 1 and isinstance(c.re, Fraction)
