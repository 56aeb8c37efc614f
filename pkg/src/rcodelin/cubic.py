"""Cubic-form analysis of ``u'' = w(x, u, u')`` with ``u`` complex and ``x`` real.

Symbols: ``x`` (real independent variable), ``u`` (complex unknown) and ``p``
standing for ``u'``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import (
    Const,
    Expr,
    Mul,
    Neg,
    Var,
    diff,
    parse,
    simplify_basic,
    substitute,
    sum_of,
    ufunc_names,
)
from .sampling import ExprCondition, ResidualReport, SamplingConfig, run_conditions

X, U, P = "x", "u", "p"
ODE_SYMBOLS = (X, U, P)
COEFF_SYMBOLS = (X, U)

W_MEANS_K = "W_means_K"
W_MEANS_k = "W_means_k"

# Left-hand sides of the two Lie compatibility conditions as signed monomials in
# derivatives of the coefficients. A factor ("C", 1, 0) is C_x, ("B", 1, 1) is B_xu.
LIE_TERMS = {
    "R1": [
        (3, [("A", 2, 0)]),
        (3, [("A", 1, 0), ("C", 0, 0)]),
        (3, [("A", 0, 0), ("C", 1, 0)]),
        (-3, [("A", 0, 1), ("D", 0, 0)]),
        (1, [("C", 0, 2)]),
        (-6, [("A", 0, 0), ("D", 0, 1)]),
        (1, [("B", 0, 0), ("C", 0, 1)]),
        (-2, [("B", 0, 0), ("B", 1, 0)]),
        (-2, [("B", 1, 1)]),
    ],
    "R2": [
        (6, [("A", 1, 0), ("D", 0, 0)]),
        (-3, [("B", 0, 1), ("D", 0, 0)]),
        (3, [("A", 0, 0), ("D", 1, 0)]),
        (1, [("B", 2, 0)]),
        (-2, [("C", 1, 1)]),
        (-3, [("B", 0, 0), ("D", 0, 1)]),
        (3, [("D", 0, 2)]),
        (2, [("C", 0, 0), ("C", 0, 1)]),
        (-1, [("C", 0, 0), ("B", 1, 0)]),
    ],
}


class NotCubic(ValueError):
    def __init__(self, max_residual: float, witness):
        super().__init__(
            f"right-hand side is not cubic in u' (fourth u'-derivative residual {max_residual:.3g})"
        )
        self.max_residual = max_residual
        self.witness = witness


@dataclass(frozen=True)
class ComplexCubicODE:
    """``u'' = A u'^3 + B u'^2 + C u' + D`` with coefficients in (x, u)."""

    A: Expr
    B: Expr
    C: Expr
    D: Expr

    @classmethod
    def parse(cls, A="0", B="0", C="0", D="0") -> "ComplexCubicODE":
        return cls(*(parse(s, COEFF_SYMBOLS) if isinstance(s, str) else s for s in (A, B, C, D)))

    def coefficients(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}

    def rhs(self) -> Expr:
        p = Var(P)
        return simplify_basic(self.A * p**3 + self.B * p**2 + self.C * p + self.D)

    def ufunc_names(self) -> frozenset:
        return frozenset().union(*(ufunc_names(e) for e in (self.A, self.B, self.C, self.D)))


def total_derivative(e: Expr, w: Expr) -> Expr:
    """``d/dx`` along solutions of ``u'' = w``: ``e_x + p e_u + w e_p``."""
    return simplify_basic(diff(e, X) + Var(P) * diff(e, U) + w * diff(e, P))


def _fourth_p_derivative(w: Expr) -> Expr:
    for _ in range(4):
        w = diff(w, P)
    return w


def _tresse_terms(w: Expr) -> list:
    d = total_derivative
    w_p = diff(w, P)
    w_u = diff(w, U)
    w_pp = diff(w_p, P)
    w_pu = diff(w_p, U)
    w_uu = diff(w_u, U)
    d_wpp = d(w_pp, w)
    return [
        d(d_wpp, w),
        simplify_basic(Const(-4) * d(w_pu, w)),
        simplify_basic(Const(-3) * w_u * w_pp),
        simplify_basic(Const(6) * w_uu),
        simplify_basic(w_p * (Const(4) * w_pu - d_wpp)),
    ]


def tresse_invariants(w: Expr) -> tuple:
    """The two Tresse relative invariants ``(I1, I2)`` of ``u'' = w``."""
    return _fourth_p_derivative(w), sum_of(_tresse_terms(w))


def check_tresse(w: Expr, cfg: SamplingConfig | None = None) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    i1, i2 = tresse_invariants(w)
    conds = [ExprCondition("I1", i1), ExprCondition("I2", i2)]
    return run_conditions(conds, cfg, ODE_SYMBOLS, ufunc_names(w))


def extract_cubic(w: Expr, cfg: SamplingConfig | None = None) -> ComplexCubicODE:
    """Split a right-hand side into its cubic coefficients.

    Raises NotCubic unless the fourth ``p``-derivative vanishes numerically.
    """
    cfg = cfg or SamplingConfig()
    report = run_conditions([ExprCondition("I1", _fourth_p_derivative(w))], cfg, ODE_SYMBOLS, ufunc_names(w))
    if report.verdict != "pass":
        entry = report.conditions[0]
        raise NotCubic(entry.max_normalized_residual, entry.witness)
    zero = Const(0)
    derivs = [w]
    for _ in range(3):
        derivs.append(diff(derivs[-1], P))
    at0 = [simplify_basic(substitute(e, P, zero)) for e in derivs]
    D, C = at0[0], at0[1]
    B = simplify_basic(Const(Fraction(1, 2)) * at0[2])
    A = simplify_basic(Const(Fraction(1, 6)) * at0[3])
    return ComplexCubicODE(A, B, C, D)


class _Derivatives:
    """Memoized mixed partials ``F_{x^i u^j}`` of the cubic coefficients."""

    def __init__(self, coefficients: dict):
        self.base = coefficients
        self.cache: dict = {}

    def __call__(self, name: str, nx: int, nu: int) -> Expr:
        key = (name, nx, nu)
        if key not in self.cache:
            if nx == 0 and nu == 0:
                out = self.base[name]
            elif nx > 0:
                out = diff(self(name, nx - 1, nu), X)
            else:
                out = diff(self(name, nx, nu - 1), U)
            self.cache[key] = out
        return self.cache[key]


def _assemble(table, derivs) -> Expr:
    terms = []
    for coef, factors in table:
        term = Const(coef)
        for f in factors:
            term = Mul(term, derivs(*f))
        terms.append(simplify_basic(term))
    return sum_of(terms)


def lie_residuals_complex(ode: ComplexCubicODE) -> tuple:
    """Left-hand sides ``(R1, R2)`` of the Lie compatibility conditions."""
    derivs = _Derivatives(ode.coefficients())
    return _assemble(LIE_TERMS["R1"], derivs), _assemble(LIE_TERMS["R2"], derivs)


def check_linearizable_complex(ode: ComplexCubicODE, cfg: SamplingConfig | None = None) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    r1, r2 = lie_residuals_complex(ode)
    conds = [ExprCondition("R1", r1), ExprCondition("R2", r2)]
    return run_conditions(conds, cfg, COEFF_SYMBOLS, ode.ufunc_names())


def auxiliary_residuals(ode: ComplexCubicODE, k: Expr, K: Expr, interp: str = W_MEANS_K) -> tuple:
    """Residuals of the four first-order relations for the auxiliary pair (k, K).

    The third relation contains an undefined ``W``; ``interp`` selects whether
    it stands for ``K`` (default) or ``k``.
    """
    if interp not in (W_MEANS_K, W_MEANS_k):
        raise ValueError(f"unknown interpretation {interp!r}")
    A, B, C, D = ode.A, ode.B, ode.C, ode.D
    W = K if interp == W_MEANS_K else k
    third = Const(Fraction(1, 3))
    two_thirds = Const(Fraction(2, 3))
    s = simplify_basic
    rows = [
        [diff(k, X), Neg(k * K), A * D, Neg(third * diff(C, U)), two_thirds * diff(B, X)],
        [diff(k, U), k * k, B * k, A * K, diff(A, X), A * C],
        [diff(K, X), Neg(K * K), Neg(D * k), Neg(C * W), diff(D, U), Neg(B * D)],
        [diff(K, U), K * k, Neg(A * D), Neg(third * diff(B, X)), two_thirds * diff(C, U)],
    ]
    return tuple(sum_of(s(t) for t in row) for row in rows)


def check_auxiliary(
    ode: ComplexCubicODE, k: Expr, K: Expr, cfg: SamplingConfig | None = None, interp: str = W_MEANS_K
) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    res = auxiliary_residuals(ode, k, K, interp)
    conds = [ExprCondition(f"aux{n}", r) for n, r in zip((1, 2, 3, 4), res)]
    names = ode.ufunc_names().union(ufunc_names(k), ufunc_names(K))
    return run_conditions(conds, cfg, COEFF_SYMBOLS, names)
