"""Verification of point transformations between ODEs and real systems.

A complex map ``(x, u) -> (chi, U)`` carries ``u'' = w(x, u, p)`` to
``U'' = W(chi, U, dU)``. Target equations are always written in the symbols
``chi, U, dU`` (``dU`` is ``dU/dchi``); real targets use ``chi, Upsilon,
zeta, dUpsilon, dzeta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cubic import COEFF_SYMBOLS, ODE_SYMBOLS, P, U, X, total_derivative
from .expr import (
    Bindings,
    Const,
    DomainError,
    Expr,
    ParseError,
    Var,
    diff,
    evaluator,
    parse,
    simplify_basic,
    split_terms,
    substitute_many,
    to_string,
    ufunc_names,
)
from .expr.simplify import const_value
from .realify import (
    REAL_SYMBOLS,
    DirectFunction,
    RealFunction,
    RealPoint,
    RealSystem,
    SplitFunction,
)
from .sampling import (
    Box,
    FunctionCondition,
    PointSampler,
    ResidualReport,
    SamplingConfig,
    normalized,
    run_conditions,
)

TARGET_SYMBOLS = ("chi", "U", "dU")
FIRST_ORDER_TARGET_SYMBOLS = ("chi", "U")
REAL_TARGET_SYMBOLS = ("chi", "Upsilon", "zeta", "dUpsilon", "dzeta")
FIRST_ORDER_REAL_TARGET_SYMBOLS = ("chi", "Upsilon", "zeta")
INVERSE_SYMBOLS = ("chi", "U")

JACOBIAN_FLOOR = 1e-12
IMAGINARY_FLOOR = 1e-12


class DegenerateJacobian(DomainError):
    """``D chi`` vanishes (numerically) at the sample point."""


class AnalyticContinuationUnsupported(ValueError):
    """The real map has a complex-valued independent variable."""


class InvalidConstant(ValueError):
    pass


@dataclass(frozen=True)
class PointMap2:
    chi: Expr
    U: Expr
    inverse: tuple | None = None

    @classmethod
    def parse(cls, chi: str, U: str, inverse: tuple | None = None) -> "PointMap2":
        inv = None
        if inverse is not None:
            inv = tuple(parse(s, INVERSE_SYMBOLS) for s in inverse)
        return cls(parse(chi, COEFF_SYMBOLS), parse(U, COEFF_SYMBOLS), inv)

    @classmethod
    def identity(cls) -> "PointMap2":
        return cls(Var(X), Var(U), (Var("chi"), Var("U")))

    def ufunc_names(self) -> frozenset:
        return ufunc_names(self.chi) | ufunc_names(self.U)

    def compose(self, after: "PointMap2") -> "PointMap2":
        """The map ``after o self``; ``after`` is written in ``(x, u)`` of the middle equation."""
        mapping = {X: self.chi, U: self.U}
        return PointMap2(
            simplify_basic(substitute_many(after.chi, mapping)),
            simplify_basic(substitute_many(after.U, mapping)),
        )


class _Pushforward:
    """Symbolic ``U'`` and ``U''`` of a map along ``u'' = w`` (or ``u' = w``)."""

    def __init__(self, source_w: Expr, target_w: Expr, m: PointMap2, order: int):
        self.order = order
        self.map = m
        p = Var(P) if order == 2 else source_w
        self.dchi = simplify_basic(diff(m.chi, X) + p * diff(m.chi, U))
        dU_num = simplify_basic(diff(m.U, X) + p * diff(m.U, U))
        self.dU = simplify_basic(dU_num / self.dchi)
        if order == 2:
            self.ddU = simplify_basic(total_derivative(self.dU, source_w) / self.dchi)
            mapping = {"chi": m.chi, "U": m.U, "dU": self.dU}
            self.lhs = self.ddU
        else:
            mapping = {"chi": m.chi, "U": m.U}
            self.lhs = self.dU
        self.target_terms = [simplify_basic(substitute_many(t, mapping)) for t in split_terms(target_w)]
        self.names = ufunc_names(source_w) | ufunc_names(target_w) | m.ufunc_names()

    def residual(self, run) -> tuple:
        dchi = run(self.dchi)
        if abs(dchi) < JACOBIAN_FLOOR:
            raise DegenerateJacobian(f"|D chi| = {abs(dchi):.3g}")
        lhs = run(self.lhs)
        rhs = [run(t) for t in self.target_terms]
        return lhs - sum(rhs, 0j), abs(lhs) + sum(abs(v) for v in rhs)


def pushforward_check(source_w: Expr, target_w: Expr, m: PointMap2, pt: tuple,
                      functions=None, order: int = 2) -> float:
    """Normalized residual of the transformed equation at one point.

    ``pt`` is ``(x, u, p)`` for second-order sources and ``(x, u)`` for
    first-order ones (``u' = source_w``; the target is then ``U' = target_w``).
    """
    push = _Pushforward(source_w, target_w, m, order)
    values = {X: pt[0], U: pt[1]}
    if order == 2:
        values[P] = pt[2]
    run = evaluator(Bindings(values, functions or {}))
    value, scale = push.residual(run)
    return normalized(value, scale)


def verify_transformation(source_w: Expr, target_w: Expr, m: PointMap2,
                          cfg: SamplingConfig | None = None, order: int = 2) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    push = _Pushforward(source_w, target_w, m, order)
    cond = FunctionCondition("pushforward", lambda b, run: push.residual(run))
    symbols = ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS
    return run_conditions([cond], cfg, symbols, push.names)


def check_inverse(m: PointMap2, cfg: SamplingConfig | None = None) -> ResidualReport:
    """Round trip ``(x, u) -> (chi, U) -> (x, u)`` through the declared inverse."""
    if m.inverse is None:
        raise ValueError("map has no declared inverse")
    cfg = cfg or SamplingConfig()
    mapping = {"chi": m.chi, "U": m.U}
    back = [simplify_basic(substitute_many(e, mapping)) for e in m.inverse]

    def evaluate(bindings, run):
        x, u = bindings.values[X], bindings.values[U]
        bx, bu = run(back[0]), run(back[1])
        return complex(max(abs(bx - x), abs(bu - u))), abs(x) + abs(u)

    names = m.ufunc_names() | ufunc_names(m.inverse[0]) | ufunc_names(m.inverse[1])
    return run_conditions([FunctionCondition("round_trip", evaluate)], cfg, COEFF_SYMBOLS, names)


@dataclass
class PointMap3:
    """Real map ``(x, y, z) -> (chi, Upsilon, zeta)``.

    ``chi_imag`` is kept when the map came from a complex parent so the
    analytic-continuation case can be recognized.
    """

    chi: RealFunction
    upsilon: RealFunction
    zeta: RealFunction
    analytic_continuation: bool = False
    chi_imag: RealFunction | None = None
    max_imag_chi: float = 0.0

    @classmethod
    def parse(cls, chi: str, upsilon: str, zeta: str) -> "PointMap3":
        return cls(*(DirectFunction(parse(s, REAL_SYMBOLS)) for s in (chi, upsilon, zeta)))

    def values(self, pt: RealPoint) -> tuple:
        return self.chi.value(pt), self.upsilon.value(pt), self.zeta.value(pt)


def realify_map(m: PointMap2, cfg: SamplingConfig | None = None) -> PointMap3:
    """Split ``U(x, y + i z)`` into ``Upsilon + i zeta``; ``chi`` keeps its real part.

    Angles come out of the principal ``log``/``atan2`` branches, so for
    ``U = log(u)/x`` the ``zeta`` component is ``atan2(z, y)/x``.
    """
    cfg = cfg or SamplingConfig()
    chi_re = SplitFunction(m.chi, "re")
    chi_im = SplitFunction(m.chi, "im")
    worst = 0.0
    for functions in cfg.instantiation_sets(m.ufunc_names()):
        sampler = PointSampler(cfg, COEFF_SYMBOLS)
        for _ in range(cfg.points):
            pt = RealPoint.from_complex_sample(sampler.draw(), functions)
            try:
                worst = max(worst, abs(chi_im.value(pt)))
            except DomainError:
                continue
    return PointMap3(
        chi_re,
        SplitFunction(m.U, "re"),
        SplitFunction(m.U, "im"),
        analytic_continuation=worst > IMAGINARY_FLOOR,
        chi_imag=chi_im,
        max_imag_chi=worst,
    )


def _first_total(F: RealFunction, pt, dy, dz) -> tuple:
    """``D F`` and the partials needed for ``D^2 F``."""
    fx, fy, fz = (F.partial(v).value(pt) for v in REAL_SYMBOLS)
    return fx + fy * dy + fz * dz, (fx, fy, fz)


def _second_total(F: RealFunction, pt, dy, dz, ypp, zpp) -> tuple:
    d1, (fx, fy, fz) = _first_total(F, pt, dy, dz)
    Fx, Fy, Fz = (F.partial(v) for v in REAL_SYMBOLS)
    hxx = Fx.partial("x").value(pt)
    hxy = Fx.partial("y").value(pt)
    hxz = Fx.partial("z").value(pt)
    hyy = Fy.partial("y").value(pt)
    hyz = Fy.partial("z").value(pt)
    hzz = Fz.partial("z").value(pt)
    d2 = (
        hxx
        + 2 * hxy * dy
        + 2 * hxz * dz
        + hyy * dy * dy
        + 2 * hyz * dy * dz
        + hzz * dz * dz
        + fy * ypp
        + fz * zpp
    )
    return d1, d2


def _real_target(target, order):
    if isinstance(target, RealSystem):
        return target
    fy, fz = target
    syms = REAL_TARGET_SYMBOLS if order == 2 else FIRST_ORDER_REAL_TARGET_SYMBOLS
    return parse(fy, syms) if isinstance(fy, str) else fy, parse(fz, syms) if isinstance(fz, str) else fz


def verify_real_transformation(source: RealSystem, target, m: PointMap3,
                               cfg: SamplingConfig | None = None) -> ResidualReport:
    """Push ``(y', z', y'', z'')`` through a real map and compare with the target.

    ``target`` is a pair of expressions (or strings) for ``Upsilon^(n)`` and
    ``zeta^(n)`` over the real target symbols.
    """
    if m.analytic_continuation:
        raise AnalyticContinuationUnsupported(
            "chi is complex-valued on real samples; verify the complex parent instead"
        )
    cfg = cfg or SamplingConfig()
    order = source.order
    ty, tz = _real_target(target, order)
    names = source.ufunc_names() | ufunc_names(ty) | ufunc_names(tz)
    for f in (m.chi, m.upsilon, m.zeta):
        src = f.source if isinstance(f, SplitFunction) else f.expr
        names |= ufunc_names(src)

    def evaluate(bindings, run):
        pt = RealPoint.from_complex_sample(bindings.values, bindings.functions)
        if order == 2:
            p = complex(bindings.values[P])
            dy, dz = p.real, p.imag
            ypp, zpp = source.evaluate(pt.x, pt.y, pt.z, dy, dz, bindings.functions)
        else:
            dy, dz = source.evaluate(pt.x, pt.y, pt.z, functions=bindings.functions)
            ypp = zpp = 0.0
        chi, ups, zet = m.values(pt)
        dchi, d2chi = _second_total(m.chi, pt, dy, dz, ypp, zpp)
        if abs(dchi) < JACOBIAN_FLOOR:
            raise DegenerateJacobian(f"|D chi| = {abs(dchi):.3g}")
        dups, d2ups = _second_total(m.upsilon, pt, dy, dz, ypp, zpp)
        dzet, d2zet = _second_total(m.zeta, pt, dy, dz, ypp, zpp)
        ups1, zet1 = dups / dchi, dzet / dchi
        tvals = {"chi": chi, "Upsilon": ups, "zeta": zet}
        if order == 2:
            ups2 = (d2ups - ups1 * d2chi) / dchi**2
            zet2 = (d2zet - zet1 * d2chi) / dchi**2
            tvals.update(dUpsilon=ups1, dzeta=zet1)
            lhs = (ups2, zet2)
        else:
            lhs = (ups1, zet1)
        trun = evaluator(Bindings(tvals, bindings.functions))
        total, scale = 0.0, 0.0
        for side, expr in zip(lhs, (ty, tz)):
            terms = [trun(t) for t in split_terms(expr)]
            total = max(total, abs(side - sum(terms, 0j)))
            scale += abs(side) + sum(abs(t) for t in terms)
        return complex(total), scale

    symbols = ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS
    return run_conditions([FunctionCondition("pushforward", evaluate)], cfg, symbols, names)


def _as_const(value, name: str) -> Const:
    if isinstance(value, Const):
        return value
    if isinstance(value, str):
        try:
            folded = const_value(parse(value, {"t"}))
        except ParseError:
            folded = None
        if folded is None:
            raise InvalidConstant(f"{name} = {value!r} is not a constant")
        return folded
    if isinstance(value, complex):
        return Const(Fraction(value.real), Fraction(value.imag))
    return Const(Fraction(value))


def _c(v: Const) -> complex:
    return v.value


def canonical_coefficients(a, b) -> dict:
    """Exact coefficients of ``chi U'' = a U'^3 + b U'^2 + c1 U' + c0``."""
    a = _as_const(a, "a")
    b = _as_const(b, "b")
    if a.is_zero():
        raise InvalidConstant("a must be nonzero")
    expr = {
        "cubic": a,
        "quadratic": b,
        "linear": Const(1) + b * b / (Const(3) * a),
        "constant": b / (Const(3) * a) + b * b * b / (Const(27) * a * a),
    }
    return {k: const_value(v) for k, v in expr.items()}


def canonical_rhs(a, b) -> Expr:
    """Right-hand side ``U'' = (...)/chi`` of the canonical cubic equation."""
    c = canonical_coefficients(a, b)
    dU = Var("dU")
    poly = c["cubic"] * dU**3 + c["quadratic"] * dU**2 + c["linear"] * dU + c["constant"]
    return simplify_basic(poly / Var("chi"))


def _format_const(c: Const):
    if c.im == 0:
        return str(c.re) if c.re.denominator != 1 else int(c.re)
    return [str(c.re), str(c.im)]


def match_canonical_cubic(ode_in_chiU: Expr, a, b, cfg: SamplingConfig | None = None) -> ResidualReport:
    """Compare ``U'' = ode_in_chiU`` with the canonical cubic form for ``(a, b)``.

    Besides the pointwise comparison, the report notes carry the exact
    canonical coefficients and the Taylor coefficients of ``chi * ode`` in
    ``dU`` read off at each sample.
    """
    cfg = cfg or SamplingConfig()
    coeffs = canonical_coefficients(a, b)
    built = canonical_rhs(a, b)
    given_terms = split_terms(ode_in_chiU)
    built_terms = split_terms(built)
    scaled = simplify_basic(Var("chi") * ode_in_chiU)
    taylor = []
    e = scaled
    for k in range(4):
        taylor.append(simplify_basic(substitute_many(e, {"dU": Const(0)})))
        e = diff(e, "dU")
    factorial = (1, 1, 2, 6)
    order_names = ("constant", "linear", "quadratic", "cubic")

    def compare(bindings, run):
        g = [run(t) for t in given_terms]
        h = [run(t) for t in built_terms]
        return sum(g, 0j) - sum(h, 0j), sum(abs(v) for v in g) + sum(abs(v) for v in h)

    def coefficient(k):
        target = _c(coeffs[order_names[k]])

        def evaluate(bindings, run):
            v = run(taylor[k]) / factorial[k]
            return v - target, abs(v) + abs(target)

        return evaluate

    conds = [FunctionCondition("canonical_form", compare)]
    conds += [FunctionCondition(f"coefficient_{order_names[k]}", coefficient(k)) for k in range(4)]
    report = run_conditions(conds, cfg, TARGET_SYMBOLS, ufunc_names(ode_in_chiU))
    report.notes.append(
        "canonical coefficients (cubic, quadratic, linear, constant) = "
        + ", ".join(str(_format_const(coeffs[n])) for n in ("cubic", "quadratic", "linear", "constant"))
    )
    return report


def canonical_real_rhs(a1, a2, b1, b2, printed: bool = False):
    """Right-hand sides of ``chi1 Y'' - chi2 Z''`` and ``chi2 Y'' + chi1 Z''``.

    ``printed=False`` gives the Re/Im split of the complex canonical form.
    ``printed=True`` reproduces the transcribed real form term by term, whose
    constant part divides by ``27 |a|^2`` instead of ``27 |a|^4``.
    Returns a function of ``(dY, dZ)``.
    """
    a1, a2, b1, b2 = (float(v) for v in (a1, a2, b1, b2))
    m = a1 * a1 + a2 * a2
    if m == 0:
        raise InvalidConstant("a must be nonzero")
    if not printed:
        a = complex(a1, a2)
        b = complex(b1, b2)
        lin = 1 + b * b / (3 * a)
        const = b / (3 * a) + b**3 / (27 * a * a)

        def split(dY, dZ):
            q = complex(dY, dZ)
            v = a * q**3 + b * q**2 + lin * q + const
            return v.real, v.imag

        return split

    def transcribed(dY, dZ):
        cub1 = dY**3 - 3 * dY * dZ**2
        cub2 = 3 * dY**2 * dZ - dZ**3
        sq1 = dY**2 - dZ**2
        sq2 = 2 * dY * dZ
        lin1 = (3 * m + (b1**2 - b2**2) * a1 + 2 * b1 * b2 * a2) / (3 * m)
        lin2 = (2 * b1 * b2 * a1 - a2 * (b1**2 - b2**2)) / (3 * m)
        c3r = (b1**3 - 3 * b1 * b2**2) * (a1**2 - a2**2) + 2 * a1 * a2 * (3 * b1**2 * b2 - b2**3)
        c3i = (3 * b1**2 * b2 - b2**3) * (a1**2 - a2**2) - 2 * (b1**3 - 3 * b1 * b2**2) * a1 * a2
        first = (
            a1 * cub1 - a2 * cub2 + b1 * sq1 - b2 * sq2 + lin1 * dY - lin2 * dZ
            + (b1 * a1 + b2 * a2) / (3 * m) + c3r / (27 * m)
        )
        second = (
            a2 * cub1 + a1 * cub2 + b2 * sq1 + b1 * sq2 + lin1 * dZ + lin2 * dY
            + (b2 * a1 - b1 * a2) / (3 * m) + c3i / (27 * m)
        )
        return first, second

    return transcribed


def match_canonical_real(system: RealSystem, a1, a2, b1, b2, cfg: SamplingConfig | None = None,
                         printed: bool = False) -> ResidualReport:
    """Compare a real target system with the real canonical form.

    ``system`` is written in ``chi, Upsilon, zeta, dUpsilon, dzeta``
    (``RealSystem`` symbols ``x, y, z, dy, dz`` are read in that order) and
    ``chi`` is taken real, so the left sides are ``chi Upsilon''`` and ``chi zeta''``.
    """
    cfg = cfg or SamplingConfig()
    rhs = canonical_real_rhs(a1, a2, b1, b2, printed=printed)

    def evaluate(bindings, run):
        x = complex(bindings.values[X]).real
        u = complex(bindings.values[U])
        p = complex(bindings.values[P])
        fy, fz = system.evaluate(x, u.real, u.imag, p.real, p.imag, bindings.functions)
        r1, r2 = rhs(p.real, p.imag)
        dev = max(abs(x * fy - r1), abs(x * fz - r2))
        return complex(dev), abs(x * fy) + abs(x * fz) + abs(r1) + abs(r2)

    return run_conditions([FunctionCondition("real_canonical_form", evaluate)], cfg, ODE_SYMBOLS,
                          system.ufunc_names())


def canonical_real_audit(a1, a2, b1, b2, cfg: SamplingConfig | None = None) -> dict:
    """Largest gap between the transcribed real form and the split of the complex one."""
    cfg = cfg or SamplingConfig()
    derived = canonical_real_rhs(a1, a2, b1, b2)
    printed = canonical_real_rhs(a1, a2, b1, b2, printed=True)
    sampler = PointSampler(cfg.with_overrides(box={"p": Box()}), ("p",))
    worst = 0.0
    witness = None
    for _ in range(cfg.points):
        q = sampler.draw()["p"]
        d = derived(q.real, q.imag)
        pr = printed(q.real, q.imag)
        gap = max(abs(d[0] - pr[0]), abs(d[1] - pr[1]))
        scale = sum(abs(v) for v in d + pr)
        res = normalized(gap, scale)
        if witness is None or res > worst:
            worst = res
            witness = {"dUpsilon": q.real, "dzeta": q.imag, "printed": list(pr), "derived": list(d)}
    return {
        "constants": {"a1": a1, "a2": a2, "b1": b1, "b2": b2},
        "max_normalized_gap": worst,
        "agrees": worst <= cfg.tolerance,
        "witness": witness,
    }
