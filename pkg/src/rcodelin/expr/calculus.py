"""Free symbols, substitution and exact symbolic differentiation."""
from __future__ import annotations

from .nodes import (
    Add,
    Call,
    Const,
    Div,
    Expr,
    Mul,
    Neg,
    Pow,
    Sub,
    UFunc,
    Var,
)
from .simplify import simplify_basic

_BINARY = (Add, Sub, Mul, Div, Pow)


def _children(e):
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, _BINARY):
        return (e.left, e.right)
    if isinstance(e, Call):
        return e.args
    if isinstance(e, UFunc):
        return (e.arg,)
    return ()


def _collect(e, pick) -> frozenset:
    seen = {}
    stack = [e]
    found = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        item = pick(node)
        if item is not None:
            found.add(item)
        stack.extend(_children(node))
    return frozenset(found)


def free_symbols(e: Expr) -> frozenset:
    return _collect(e, lambda n: n.name if isinstance(n, Var) else None)


def ufunc_names(e: Expr) -> frozenset:
    return _collect(e, lambda n: n.name if isinstance(n, UFunc) else None)


def max_ufunc_order(e: Expr) -> int:
    orders = _collect(e, lambda n: n.order if isinstance(n, UFunc) else None)
    return max(orders, default=0)


def substitute_many(e: Expr, mapping: dict) -> Expr:
    """Simultaneously replace each ``Var(name)`` for ``name`` in ``mapping``."""
    memo: dict = {}

    def walk(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit[1]
        if isinstance(node, Var):
            out = mapping.get(node.name, node)
        elif isinstance(node, Const):
            out = node
        elif isinstance(node, Neg):
            out = Neg(walk(node.arg))
        elif isinstance(node, _BINARY):
            out = type(node)(walk(node.left), walk(node.right))
        elif isinstance(node, Call):
            out = Call(node.name, tuple(walk(a) for a in node.args))
        elif isinstance(node, UFunc):
            out = UFunc(node.name, walk(node.arg), node.order)
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[id(node)] = (node, out)
        return out

    return walk(e)


def substitute(e: Expr, v: str, r: Expr) -> Expr:
    return substitute_many(e, {v: r})


def _raw_diff(e, v: str, memo, deps):
    """Derivative tree before clean-up; ``deps`` caches symbol dependence."""
    hit = memo.get(id(e))
    if hit is not None:
        return hit[1]

    def depends(node):
        hit = deps.get(id(node))
        if hit is None:
            if isinstance(node, Var):
                flag = node.name == v
            else:
                flag = any(depends(c) for c in _children(node))
            hit = deps[id(node)] = (node, flag)
        return hit[1]

    def d(node):
        if not depends(node):
            return Const(0)
        return _raw_diff(node, v, memo, deps)

    if isinstance(e, Const):
        out = Const(0)
    elif isinstance(e, Var):
        out = Const(1) if e.name == v else Const(0)
    elif isinstance(e, Neg):
        out = Neg(d(e.arg))
    elif isinstance(e, Add):
        out = Add(d(e.left), d(e.right))
    elif isinstance(e, Sub):
        out = Sub(d(e.left), d(e.right))
    elif isinstance(e, Mul):
        out = Add(Mul(d(e.left), e.right), Mul(e.left, d(e.right)))
    elif isinstance(e, Div):
        a, b = e.left, e.right
        if not depends(b):
            out = Div(d(a), b)
        else:
            out = Div(Sub(Mul(d(a), b), Mul(a, d(b))), Pow(b, Const(2)))
    elif isinstance(e, Pow):
        a, b = e.left, e.right
        if not depends(b):
            out = Mul(Mul(b, Pow(a, Sub(b, Const(1)))), d(a))
        else:
            out = Mul(e, Add(Mul(d(b), Call("log", (a,))), Div(Mul(b, d(a)), a)))
    elif isinstance(e, Call):
        out = _diff_call(e, d)
    elif isinstance(e, UFunc):
        out = Mul(UFunc(e.name, e.arg, e.order + 1), d(e.arg))
    else:
        raise TypeError(f"not an expression: {e!r}")
    memo[id(e)] = (e, out)
    return out


def _diff_call(e: Call, d):
    name = e.name
    if name == "atan2":
        a, b = e.args
        return Div(
            Sub(Mul(b, d(a)), Mul(a, d(b))),
            Add(Pow(a, Const(2)), Pow(b, Const(2))),
        )
    (a,) = e.args
    da = d(a)
    if name == "sin":
        outer = Call("cos", (a,))
    elif name == "cos":
        outer = Neg(Call("sin", (a,)))
    elif name == "tan":
        outer = Pow(Call("sec", (a,)), Const(2))
    elif name == "sec":
        outer = Mul(Call("sec", (a,)), Call("tan", (a,)))
    elif name == "exp":
        outer = e
    elif name == "log":
        return Div(da, a)
    elif name == "sqrt":
        return Div(da, Mul(Const(2), e))
    elif name == "atan":
        return Div(da, Add(Const(1), Pow(a, Const(2))))
    else:  # pragma: no cover - Call validates names
        raise ValueError(name)
    return Mul(outer, da)


def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``v``."""
    return simplify_basic(_raw_diff(e, v, {}, {}))


def diff_n(e: Expr, v: str, n: int) -> Expr:
    for _ in range(n):
        e = diff(e, v)
    return e
