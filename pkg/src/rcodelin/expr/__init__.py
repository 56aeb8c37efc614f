"""Expression language: parsing, printing, differentiation, evaluation."""
from .calculus import diff, diff_n, free_symbols, max_ufunc_order, substitute, substitute_many, ufunc_names
from .errors import (
    DomainError,
    EvaluationError,
    ExprSyntaxError,
    NonFinite,
    ParseError,
    UnboundSymbol,
    UnknownSymbol,
)
from .evaluate import Bindings, eval_complex, evaluator
from .nodes import (
    FUNC_ARG,
    KNOWN_FUNCTIONS,
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
    as_expr,
)
from .parser import parse
from .printer import to_string
from .simplify import simplify_basic


def split_terms(e: Expr) -> list:
    """Signed top-level summands of ``e`` (``a - b + c`` gives ``[a, -b, c]``)."""
    out = []
    stack = [(e, False)]
    while stack:
        node, negated = stack.pop()
        if isinstance(node, Add):
            stack.append((node.right, negated))
            stack.append((node.left, negated))
        elif isinstance(node, Sub):
            stack.append((node.right, not negated))
            stack.append((node.left, negated))
        elif isinstance(node, Neg):
            stack.append((node.arg, not negated))
        else:
            out.append(Neg(node) if negated else node)
    return out


def sum_of(terms) -> Expr:
    """Unsimplified left-associated sum; an empty sum is 0."""
    terms = list(terms)
    if not terms:
        return Const(0)
    total = terms[0]
    for t in terms[1:]:
        total = Add(total, t)
    return total


__all__ = [
    "Add",
    "Bindings",
    "Call",
    "Const",
    "Div",
    "DomainError",
    "EvaluationError",
    "Expr",
    "ExprSyntaxError",
    "FUNC_ARG",
    "KNOWN_FUNCTIONS",
    "Mul",
    "Neg",
    "NonFinite",
    "ParseError",
    "Pow",
    "Sub",
    "UFunc",
    "UnboundSymbol",
    "UnknownSymbol",
    "Var",
    "as_expr",
    "diff",
    "diff_n",
    "eval_complex",
    "evaluator",
    "free_symbols",
    "max_ufunc_order",
    "parse",
    "simplify_basic",
    "split_terms",
    "substitute",
    "substitute_many",
    "sum_of",
    "to_string",
    "ufunc_names",
]
