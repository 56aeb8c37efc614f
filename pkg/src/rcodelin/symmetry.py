"""Point symmetries of ``u'' = w``: prolongation, brackets, classification.

Complex generators are ``Z = xi(x, u) d/dx + eta(x, u) d/du``. Their real
splits act on ``(x, y, z)`` with ``u = y + i z``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubic import COEFF_SYMBOLS, ODE_SYMBOLS, P, U, X, total_derivative
from .expr import (
    Const,
    DomainError,
    Expr,
    NonFinite,
    Var,
    as_expr,
    diff,
    parse,
    simplify_basic,
    split_terms,
    sum_of,
    to_string,
    ufunc_names,
)
from .realify import REAL_SYMBOLS, RealFunction, RealPoint, SplitFunction
from .sampling import (
    ExprCondition,
    FunctionCondition,
    PointSampler,
    ResidualReport,
    SamplingConfig,
    normalized,
    run_conditions,
)

FULL_WEIGHT = "full_weight"
HALF_WEIGHT = "half_weight"

T1_6, T1_7, T1_8, T1_9, UNCLASSIFIED = "T1_6", "T1_7", "T1_8", "T1_9", "unclassified"

_VANISH = 1e-12


class Degenerate(ValueError):
    """The second field vanishes at every sample, so no ratio exists."""


class NotSymmetry(ValueError):
    def __init__(self, field_name: str, report: ResidualReport):
        super().__init__(
            f"{field_name} is not a symmetry (max residual {report.max_residual:.3g})"
        )
        self.field_name = field_name
        self.report = report


@dataclass(frozen=True)
class VectorField2:
    xi: Expr
    eta: Expr

    @classmethod
    def parse(cls, xi: str, eta: str) -> "VectorField2":
        return cls(parse(xi, COEFF_SYMBOLS), parse(eta, COEFF_SYMBOLS))

    def components(self) -> tuple:
        return (self.xi, self.eta)

    def apply(self, f: Expr) -> Expr:
        """The derivation ``xi f_x + eta f_u`` applied to ``f``."""
        return simplify_basic(self.xi * diff(f, X) + self.eta * diff(f, U))

    def ufunc_names(self) -> frozenset:
        return ufunc_names(self.xi) | ufunc_names(self.eta)

    def __str__(self):
        return f"({to_string(self.xi)})*d/dx + ({to_string(self.eta)})*d/du"


@dataclass(frozen=True)
class VectorField3:
    """``tau d/dx + phi d/dy + psi d/dz`` with real coefficient functions."""

    tau: RealFunction
    phi: RealFunction
    psi: RealFunction

    def components(self) -> tuple:
        return (self.tau, self.phi, self.psi)

    def values(self, pt: RealPoint) -> tuple:
        return tuple(c.value(pt) for c in self.components())


@dataclass(frozen=True)
class PairClassification:
    commutes: bool
    bracket_equals_Z1: bool
    proportional: bool
    rho_constant: bool
    case: str
    details: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "commutes": self.commutes,
            "bracket_equals_Z1": self.bracket_equals_Z1,
            "proportional": self.proportional,
            "rho_constant": self.rho_constant,
            "case": self.case,
        }
        if self.details:
            out.update(self.details)
        return out


def prolong2(Z: VectorField2, w: Expr) -> tuple:
    """On-shell first and second prolongation coefficients ``(eta1, eta2)``."""
    dxi = total_derivative(Z.xi, w)
    eta1 = simplify_basic(total_derivative(Z.eta, w) - Var(P) * dxi)
    eta2 = simplify_basic(total_derivative(eta1, w) - w * dxi)
    return eta1, eta2


def symmetry_condition(w: Expr, Z: VectorField2) -> Expr:
    eta1, eta2 = prolong2(Z, w)
    return sum_of(
        [
            simplify_basic(Z.xi * diff(w, X)),
            simplify_basic(Z.eta * diff(w, U)),
            simplify_basic(eta1 * diff(w, P)),
            simplify_basic(-eta2),
        ]
    )


def symmetry_residual(w: Expr, Z: VectorField2, cfg: SamplingConfig | None = None) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    cond = ExprCondition("symmetry", symmetry_condition(w, Z))
    return run_conditions([cond], cfg, ODE_SYMBOLS, ufunc_names(w) | Z.ufunc_names())


def commutator(Z1: VectorField2, Z2: VectorField2) -> VectorField2:
    return VectorField2(
        simplify_basic(Z1.apply(Z2.xi) - Z2.apply(Z1.xi)),
        simplify_basic(Z1.apply(Z2.eta) - Z2.apply(Z1.eta)),
    )


def _field_difference_condition(name: str, left: VectorField2, right: VectorField2):
    """Condition that ``left == right`` componentwise, normalized per term."""
    pairs = [
        (split_terms(a), split_terms(b))
        for a, b in zip(left.components(), right.components())
    ]

    def evaluate(bindings, run):
        total = 0.0
        scale = 0.0
        for lt, rt in pairs:
            lv = [run(t) for t in lt]
            rv = [run(t) for t in rt]
            total = max(total, abs(sum(lv, 0j) - sum(rv, 0j)))
            scale += sum(abs(v) for v in lv) + sum(abs(v) for v in rv)
        return complex(total), scale

    return FunctionCondition(name, evaluate)


ZERO_FIELD = VectorField2(Const(0), Const(0))


def check_field_equal(left: VectorField2, right: VectorField2, cfg: SamplingConfig | None = None,
                      name: str = "equal") -> ResidualReport:
    cfg = cfg or SamplingConfig()
    cond = _field_difference_condition(name, left, right)
    names = left.ufunc_names() | right.ufunc_names()
    return run_conditions([cond], cfg, COEFF_SYMBOLS, names)


@dataclass
class Proportionality:
    proportional: bool
    rho_samples: list
    rho_constant: bool
    max_cross_residual: float
    rho_variance: float

    def to_dict(self) -> dict:
        return {
            "proportional": self.proportional,
            "rho_constant": self.rho_constant,
            "max_cross_residual": self.max_cross_residual,
            "rho_variance": self.rho_variance,
            "rho_samples": [[r.real, r.imag] for r in self.rho_samples[:8]],
        }


def rho_at(Z1: VectorField2, Z2: VectorField2, run) -> complex:
    """``rho`` with ``Z1 = rho Z2``, read off the largest component of ``Z2``."""
    a1, b1 = run(Z1.xi), run(Z1.eta)
    a2, b2 = run(Z2.xi), run(Z2.eta)
    if max(abs(a2), abs(b2)) < _VANISH:
        raise DomainError("second field vanishes here")
    return a1 / a2 if abs(a2) >= abs(b2) else b1 / b2


def proportionality(Z1: VectorField2, Z2: VectorField2, cfg: SamplingConfig | None = None) -> Proportionality:
    cfg = cfg or SamplingConfig()
    rhos: list = []
    vanished = 0

    def cross(bindings, run):
        nonlocal vanished
        a1, b1 = run(Z1.xi), run(Z1.eta)
        a2, b2 = run(Z2.xi), run(Z2.eta)
        if max(abs(a2), abs(b2)) < _VANISH:
            vanished += 1
        else:
            rhos.append(a1 / a2 if abs(a2) >= abs(b2) else b1 / b2)
        return a1 * b2 - a2 * b1, abs(a1 * b2) + abs(a2 * b1)

    names = Z1.ufunc_names() | Z2.ufunc_names()
    report = run_conditions([FunctionCondition("cross", cross)], cfg, COEFF_SYMBOLS, names)
    if not rhos:
        raise Degenerate("second field vanishes at every sample point")
    arr = np.array(rhos)
    variance = float(np.mean(np.abs(arr - arr.mean()) ** 2))
    residual = report.max_residual
    return Proportionality(
        proportional=residual <= cfg.tolerance,
        rho_samples=rhos,
        rho_constant=variance <= cfg.tolerance,
        max_cross_residual=residual,
        rho_variance=variance,
    )


def classify_pair(w: Expr, Z1: VectorField2, Z2: VectorField2,
                  cfg: SamplingConfig | None = None) -> PairClassification:
    """Place a symmetry pair in one of the four two-symmetry cases, as given.

    No change of basis is attempted, so a pair that would fit after
    recombination is reported as unclassified.
    """
    cfg = cfg or SamplingConfig()
    for name, Z in (("Z1", Z1), ("Z2", Z2)):
        report = symmetry_residual(w, Z, cfg)
        if report.verdict != "pass":
            raise NotSymmetry(name, report)
    bracket = commutator(Z1, Z2)
    commute_report = check_field_equal(bracket, ZERO_FIELD, cfg, "commutator")
    equals_report = check_field_equal(bracket, Z1, cfg, "bracket_minus_Z1")
    prop = proportionality(Z1, Z2, cfg)
    commutes = commute_report.verdict == "pass"
    equals = equals_report.verdict == "pass"
    if commutes and prop.proportional and not prop.rho_constant:
        case = T1_6
    elif equals and prop.proportional and not prop.rho_constant:
        case = T1_7
    elif commutes and not prop.proportional:
        case = T1_8
    elif equals and not prop.proportional:
        case = T1_9
    else:
        case = UNCLASSIFIED
    details = {
        "bracket": {"xi": to_string(bracket.xi), "eta": to_string(bracket.eta)},
        "commutator_residual": commute_report.max_residual,
        "bracket_minus_Z1_residual": equals_report.max_residual,
        "proportionality": prop.to_dict(),
    }
    return PairClassification(commutes, equals, prop.proportional, prop.rho_constant, case, details)


def realify_vectorfield(Z: VectorField2, convention: str = FULL_WEIGHT) -> tuple:
    """Split ``Z`` into ``(X, Y)`` with ``Z = X + i Y``.

    Full weight: ``X = xi1 d/dx + eta1 d/dy + eta2 d/dz`` and
    ``Y = xi2 d/dx + eta2 d/dy - eta1 d/dz``. Half weight halves the
    ``d/dy, d/dz`` parts, which makes ``X + i Y`` act exactly as ``Z`` on
    functions analytic in ``u``.
    """
    if convention not in (FULL_WEIGHT, HALF_WEIGHT):
        raise ValueError(f"unknown convention {convention!r}")
    s = 1.0 if convention == FULL_WEIGHT else 0.5
    xi1, xi2 = SplitFunction(Z.xi, "re"), SplitFunction(Z.xi, "im")
    X = VectorField3(xi1, SplitFunction(Z.eta, "re", s), SplitFunction(Z.eta, "im", s))
    Y = VectorField3(xi2, SplitFunction(Z.eta, "im", s), SplitFunction(Z.eta, "re", -s))
    return X, Y


def _bracket_terms(V: VectorField3, W: VectorField3, pt: RealPoint) -> list:
    """Per component: list of signed products making up ``[V, W]``."""
    v = V.values(pt)
    w = W.values(pt)
    out = []
    for wa, va in zip(W.components(), V.components()):
        terms = []
        for k, var in enumerate(REAL_SYMBOLS):
            terms.append(v[k] * wa.partial(var).value(pt))
            terms.append(-w[k] * va.partial(var).value(pt))
        out.append(terms)
    return out


def bracket3(V: VectorField3, W: VectorField3, pt: RealPoint) -> tuple:
    return tuple(sum(t) for t in _bracket_terms(V, W, pt))


def _combination(first, second, sign, pt):
    """``first[a] + sign * second[a]`` for bracket term lists; returns (norm, scale)."""
    worst = 0.0
    scale = 0.0
    for ta, tb in zip(first, second):
        worst = max(worst, abs(sum(ta) + sign * sum(tb)))
        scale += sum(abs(t) for t in ta) + sum(abs(t) for t in tb)
    return worst, scale


COMMUTATION_NAMES = ("XX_minus_YY", "XY_plus_YX")


def real_commutation_checks(X1: VectorField3, Y1: VectorField3, X2: VectorField3, Y2: VectorField3,
                            cfg: SamplingConfig | None = None, rho=None, ufuncs=()) -> ResidualReport:
    """Check ``[X1,X2] - [Y1,Y2] = 0`` and ``[X1,Y2] + [Y1,X2] = 0`` at samples.

    ``rho`` (a callable on the complex evaluator returning ``rho1 + i rho2``)
    adds the linear relations ``X1 = rho1 X2 - rho2 Y2``, ``Y1 = rho1 Y2 + rho2 X2``.
    The report's verdict is pass when every included relation holds.
    """
    cfg = cfg or SamplingConfig()

    def pt_of(bindings):
        return RealPoint.from_complex_sample(bindings.values, bindings.functions)

    def xx_minus_yy(bindings, run):
        pt = pt_of(bindings)
        v, s = _combination(_bracket_terms(X1, X2, pt), _bracket_terms(Y1, Y2, pt), -1, pt)
        return complex(v), s

    def xy_plus_yx(bindings, run):
        pt = pt_of(bindings)
        v, s = _combination(_bracket_terms(X1, Y2, pt), _bracket_terms(Y1, X2, pt), 1, pt)
        return complex(v), s

    conds = [
        FunctionCondition(COMMUTATION_NAMES[0], xx_minus_yy),
        FunctionCondition(COMMUTATION_NAMES[1], xy_plus_yx),
    ]
    if rho is not None:

        def relation(target, a, b, sign):
            def evaluate(bindings, run):
                pt = pt_of(bindings)
                r = rho(run)
                t, av, bv = target.values(pt), a.values(pt), b.values(pt)
                worst, scale = 0.0, 0.0
                for tk, ak, bk in zip(t, av, bv):
                    # target = rho1 * a + sign * rho2 * b
                    p1, p2 = r.real * ak, sign * r.imag * bk
                    worst = max(worst, abs(tk - p1 - p2))
                    scale += abs(tk) + abs(p1) + abs(p2)
                return complex(worst), scale

            return evaluate

        conds.append(FunctionCondition("rho_relation_X1", relation(X1, X2, Y2, -1)))
        conds.append(FunctionCondition("rho_relation_Y1", relation(Y1, Y2, X2, 1)))
    return run_conditions(conds, cfg, COEFF_SYMBOLS, ufuncs)


def split_pair_checks(Z1: VectorField2, Z2: VectorField2, cfg: SamplingConfig | None = None,
                      convention: str = FULL_WEIGHT) -> dict:
    """Realify a complex pair and run the commutation and rho diagnostics."""
    cfg = cfg or SamplingConfig()
    X1, Y1 = realify_vectorfield(Z1, convention)
    X2, Y2 = realify_vectorfield(Z2, convention)
    names = Z1.ufunc_names() | Z2.ufunc_names()
    brackets = real_commutation_checks(X1, Y1, X2, Y2, cfg, ufuncs=names)
    vanish = {c.name: c.passed(cfg.tolerance) for c in brackets.conditions}
    out = {
        "convention": convention,
        "brackets_vanish": all(vanish.values()),
        "brackets": [c.to_dict(cfg.tolerance) for c in brackets.conditions],
    }
    try:
        prop = proportionality(Z1, Z2, cfg)
    except Degenerate:
        prop = None
    if prop is not None and prop.proportional:
        rel = real_commutation_checks(X1, Y1, X2, Y2, cfg, rho=lambda run: rho_at(Z1, Z2, run), ufuncs=names)
        out["rho_relations"] = [
            c.to_dict(cfg.tolerance) for c in rel.conditions if c.name.startswith("rho_")
        ]
    return out
