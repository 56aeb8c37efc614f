"""Double-precision complex evaluation with principal branches.

Branch conventions: ``log`` has imaginary part in (-pi, pi], ``sqrt`` cuts
along the negative real axis, ``atan`` is the principal inverse. ``atan2``
is the real two-argument angle and rejects complex arguments.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .calculus import diff
from .errors import DomainError, NonFinite, UnboundSymbol
from .nodes import FUNC_ARG, Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sub, UFunc, Var

_REAL_SLACK = 1e-12


@dataclass(frozen=True)
class Bindings:
    """Values for free symbols plus concrete instantiations of function symbols.

    Instantiations are expressions in the placeholder symbol ``t``.
    """

    values: Mapping[str, complex] = field(default_factory=dict)
    functions: Mapping[str, Expr] = field(default_factory=dict)


@lru_cache(maxsize=512)
def instantiation_derivative(body: Expr, order: int) -> Expr:
    if order == 0:
        return body
    return diff(instantiation_derivative(body, order - 1), FUNC_ARG)


def _canon(z: complex) -> complex:
    # -0.0 imaginary parts would otherwise select the lower side of branch cuts
    return complex(z.real, z.imag + 0.0)


def _real_arg(z: complex, node) -> float:
    if abs(z.imag) > _REAL_SLACK * (1.0 + abs(z.real)):
        raise DomainError("atan2 requires real arguments", node)
    return z.real


def _call(node: Call, args: list) -> complex:
    name = node.name
    if name == "atan2":
        a = _real_arg(args[0], node)
        b = _real_arg(args[1], node)
        if a == 0.0 and b == 0.0:
            raise DomainError("atan2(0, 0) is undefined", node)
        return complex(math.atan2(a, b), 0.0)
    (z,) = args
    if name == "sin":
        return cmath.sin(z)
    if name == "cos":
        return cmath.cos(z)
    if name == "tan":
        c = cmath.cos(z)
        if c == 0:
            raise DomainError("tan pole", node)
        return cmath.tan(z)
    if name == "sec":
        c = cmath.cos(z)
        if c == 0:
            raise DomainError("sec pole", node)
        return 1.0 / c
    if name == "exp":
        return cmath.exp(z)
    if name == "log":
        if z == 0:
            raise DomainError("log of zero", node)
        return cmath.log(_canon(z))
    if name == "sqrt":
        return cmath.sqrt(_canon(z))
    if name == "atan":
        if z == 1j or z == -1j:
            raise DomainError("atan branch point", node)
        return cmath.atan(_canon(z))
    raise DomainError(f"unknown function {name}", node)  # pragma: no cover


class _Evaluator:
    def __init__(self, bindings: Bindings):
        self.values = bindings.values
        self.functions = bindings.functions
        self.memo: dict = {}

    def run(self, e) -> complex:
        hit = self.memo.get(id(e))
        if hit is not None:
            return hit[1]
        try:
            out = self._eval(e)
        except (ZeroDivisionError, ValueError) as exc:
            raise DomainError(str(exc) or "domain error", e) from exc
        except OverflowError as exc:
            raise NonFinite(str(exc) or "overflow", e) from exc
        if not cmath.isfinite(out):
            raise NonFinite("non-finite value", e)
        self.memo[id(e)] = (e, out)
        return out

    def _eval(self, e) -> complex:
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Var):
            try:
                return complex(self.values[e.name])
            except KeyError:
                raise UnboundSymbol(f"symbol {e.name!r} is not bound", e) from None
        if isinstance(e, Neg):
            return -self.run(e.arg)
        if isinstance(e, Add):
            return self.run(e.left) + self.run(e.right)
        if isinstance(e, Sub):
            return self.run(e.left) - self.run(e.right)
        if isinstance(e, Mul):
            return self.run(e.left) * self.run(e.right)
        if isinstance(e, Div):
            den = self.run(e.right)
            if den == 0:
                raise DomainError("division by zero", e)
            return self.run(e.left) / den
        if isinstance(e, Pow):
            base = self.run(e.left)
            if isinstance(e.right, Const) and e.right.is_integer():
                n = int(e.right.re)
                if base == 0 and n < 0:
                    raise DomainError("zero to a negative power", e)
                return base**n if abs(n) > 100 else _int_pow(base, n)
            power = self.run(e.right)
            if base == 0:
                if power.real > 0 and power.imag == 0:
                    return 0j
                raise DomainError("zero to a non-positive or complex power", e)
            return _canon(base) ** power
        if isinstance(e, Call):
            return _call(e, [self.run(a) for a in e.args])
        if isinstance(e, UFunc):
            body = self.functions.get(e.name)
            if body is None:
                raise UnboundSymbol(f"function {e.name!r} is not instantiated", e)
            arg = self.run(e.arg)
            target = instantiation_derivative(body, e.order)
            return _Evaluator(Bindings({FUNC_ARG: arg}, self.functions)).run(target)
        raise TypeError(f"not an expression: {e!r}")


def _int_pow(z: complex, n: int) -> complex:
    if n < 0:
        return 1.0 / _int_pow(z, -n)
    result = 1 + 0j
    while n:
        if n & 1:
            result *= z
        z *= z
        n >>= 1
    return result


def eval_complex(e: Expr, b: Bindings | Mapping[str, complex]) -> complex:
    """Evaluate ``e``; raises DomainError / NonFinite carrying the failing subtree."""
    if not isinstance(b, Bindings):
        b = Bindings(dict(b))
    return _Evaluator(b).run(e)


def evaluator(b: Bindings):
    """Reusable evaluator whose cache is shared across expressions at one point."""
    return _Evaluator(b).run
