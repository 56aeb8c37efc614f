"""Built-in worked examples with their expected outcomes.

Each entry bundles a handful of checks. A check returns an outcome (usually
``pass``/``fail``, or a case label for classifications) that is compared with
the recorded expectation; an entry passes when every check behaves as expected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cubic, odeint, realify, symmetry, transform
from .cubic import COEFF_SYMBOLS, ODE_SYMBOLS
from .expr import parse
from .sampling import FAIL, PASS, Box, ResidualReport, SamplingConfig

LN2 = "0.6931471805599453"


@dataclass
class CheckResult:
    outcome: str
    max_residual: float = 0.0
    samples: int = 0
    details: dict = field(default_factory=dict)


@dataclass
class Check:
    name: str
    expected: str
    run: Callable[[SamplingConfig], CheckResult]
    note: str = ""


@dataclass
class Example:
    id: str
    title: str
    checks: list


def _from_report(report: ResidualReport, **details) -> CheckResult:
    samples = min((c.sample_count for c in report.conditions), default=0)
    return CheckResult(report.verdict, report.max_residual, samples, details)


def _ode(text):
    return parse(text, ODE_SYMBOLS)


def _coeff(text):
    return parse(text, COEFF_SYMBOLS)


def _target(text, order=2):
    return parse(text, transform.TARGET_SYMBOLS if order == 2 else transform.FIRST_ORDER_TARGET_SYMBOLS)


def _funcs(**bodies):
    return {name: [parse(b, {"t"}) for b in texts] for name, texts in bodies.items()}


def _solution_cfg(cfg: SamplingConfig, **changes) -> SamplingConfig:
    return cfg.with_overrides(points=max(8, cfg.points // 2), **changes)


# check builders


def linearizable(rhs: str, **cfg_changes):
    def run(cfg):
        ode = cubic.extract_cubic(_ode(rhs), cfg)
        return _from_report(cubic.check_linearizable_complex(ode, cfg.with_overrides(**cfg_changes)))

    return run


def tresse(rhs: str):
    def run(cfg):
        return _from_report(cubic.check_tresse(_ode(rhs), cfg))

    return run


def real_derived(rhs: str):
    def run(cfg):
        ode = cubic.extract_cubic(_ode(rhs), cfg)
        return _from_report(realify.check_linearizable_real(ode, cfg))

    return run


def printed_real_direct(**coefficients):
    def run(cfg):
        system = realify.RealCubicSystem.direct(**coefficients)
        return _from_report(realify.check_printed_real(system, cfg))

    return run


def cross_check(rhs: str):
    """Passes when the derived split vanishes; printed mismatches go in the details."""

    def run(cfg):
        ode = cubic.extract_cubic(_ode(rhs), cfg)
        report = realify.cross_check_conditions(ode, cfg)
        mismatches = {
            c["name"]: [
                {"factors": m["factors"], "printed": m["printed_coefficient"], "derived": m["derived_coefficient"]}
                for m in c["term_mismatches"]
            ]
            for c in report["conditions"]
        }
        worst = max(c["max_derived_residual"] for c in report["conditions"])
        outcome = PASS if report["derived_pass"] else FAIL
        return CheckResult(outcome, worst, report["samples"], {
            "printed_pass": report["printed_pass"],
            "term_mismatches": mismatches,
        })

    return run


def auxiliary(rhs: str, k: str, K: str, interp: str):
    def run(cfg):
        ode = cubic.extract_cubic(_ode(rhs), cfg)
        return _from_report(cubic.check_auxiliary(ode, _coeff(k), _coeff(K), cfg, interp))

    return run


def is_symmetry(rhs: str, xi: str, eta: str, **cfg_changes):
    def run(cfg):
        Z = symmetry.VectorField2.parse(xi, eta)
        return _from_report(symmetry.symmetry_residual(_ode(rhs), Z, cfg.with_overrides(**cfg_changes)))

    return run


def classification(rhs: str, z1: tuple, z2: tuple, **cfg_changes):
    def run(cfg):
        c = symmetry.classify_pair(
            _ode(rhs), symmetry.VectorField2.parse(*z1), symmetry.VectorField2.parse(*z2),
            cfg.with_overrides(**cfg_changes),
        )
        return CheckResult(c.case, 0.0, cfg.points, c.to_dict())

    return run


def split_brackets(z1: tuple, z2: tuple):
    """Outcome ``pass`` when both real bracket combinations vanish."""

    def run(cfg):
        out = symmetry.split_pair_checks(symmetry.VectorField2.parse(*z1), symmetry.VectorField2.parse(*z2), cfg)
        worst = max(c["max_residual"] for c in out["brackets"])
        return CheckResult(PASS if out["brackets_vanish"] else FAIL, worst, cfg.points, out)

    return run


def complex_transform(source: str, target: str, chi: str, U: str, order: int = 2, **cfg_changes):
    def run(cfg):
        src = _ode(source) if order == 2 else _coeff(source)
        report = transform.verify_transformation(
            src, _target(target, order), transform.PointMap2.parse(chi, U), cfg.with_overrides(**cfg_changes), order
        )
        return _from_report(report)

    return run


def identity_transform(source: str, target: str):
    def run(cfg):
        report = transform.verify_transformation(_ode(source), _target(target), transform.PointMap2.identity(), cfg)
        return _from_report(report)

    return run


def realified_map_matches(chi: str, U: str, direct: tuple, **cfg_changes):
    """Outcome ``pass`` when the split of a complex map equals the given real map."""

    def run(cfg):
        local = cfg.with_overrides(**cfg_changes)
        split = transform.realify_map(transform.PointMap2.parse(chi, U), local)
        given = transform.PointMap3.parse(*direct)
        worst = 0.0
        count = 0
        sampler = transform.PointSampler(local, COEFF_SYMBOLS)
        for _ in range(local.points):
            pt = realify.RealPoint.from_complex_sample(sampler.draw())
            try:
                a, b = split.values(pt), given.values(pt)
            except ArithmeticError:
                continue
            count += 1
            worst = max(worst, max(abs(p - q) / (1 + abs(p) + abs(q)) for p, q in zip(a, b)))
        return CheckResult(PASS if worst <= local.tolerance else FAIL, worst, count)

    return run


def analytic_continuation(chi: str, U: str):
    """Outcome ``pass`` when the split map is flagged as complex-valued in ``chi``."""

    def run(cfg):
        m = transform.realify_map(transform.PointMap2.parse(chi, U), cfg)
        return CheckResult(PASS if m.analytic_continuation else FAIL, m.max_imag_chi, cfg.points)

    return run


def real_transform(source: realify.RealSystem, target: tuple, m3: tuple, **cfg_changes):
    def run(cfg):
        report = transform.verify_real_transformation(
            source, target, transform.PointMap3.parse(*m3), cfg.with_overrides(**cfg_changes)
        )
        return _from_report(report)

    return run


def canonical(target: str, a, b):
    def run(cfg):
        return _from_report(transform.match_canonical_cubic(_target(target), a, b, cfg))

    return run


def canonical_rejects_zero():
    def run(cfg):
        try:
            transform.canonical_coefficients(0, 6)
        except transform.InvalidConstant:
            return CheckResult(PASS)
        return CheckResult(FAIL)

    return run


def solution(equation, sol: odeint.ClosedFormSolution, order: int = 2, **cfg_changes):
    def run(cfg):
        eq = equation if isinstance(equation, realify.RealSystem) else (_ode(equation) if order == 2 else _coeff(equation))
        report = odeint.verify_solution(eq, sol, _solution_cfg(cfg, **cfg_changes), order)
        return _from_report(report)

    return run


def tracks(system: realify.RealSystem, sol: odeint.ClosedFormSolution, span: tuple, bound: float):
    def run(cfg):
        out = odeint.track_closed_form(system, sol, span)
        err = out["max_abs_error"]
        return CheckResult(PASS if err <= bound else FAIL, err, len(out["trajectory"].x), {"bound": bound})

    return run


def rk4_convergence(system: realify.RealSystem):
    def run(cfg):
        errors = []
        for h in (1e-2, 5e-3):
            traj = odeint.integrate(system, (0.0, 1.0, 0.0, 0.0, 0.0), (0.0, 2.0), h=h)
            errors.append(float(np.max(np.abs(traj.y - np.cos(traj.x)))))
        ratio = errors[0] / errors[1]
        return CheckResult(PASS if 12 <= ratio <= 20 else FAIL, errors[1], 2, {"errors": errors, "ratio": ratio})

    return run


# systems and solutions

RICCATI_SYSTEM = realify.RealSystem.parse("-y^2 + z^2", "-2*y*z", order=1)
OSCILLATOR_SYSTEM = realify.RealSystem.parse("-y", "-z")
CUBIC_DECAY = "-3*u*p - u^3"
CUBIC_DECAY_SYSTEM = realify.RealSystem.parse(
    "-3*(y*dy - z*dz) - (y^3 - 3*y*z^2)", "-3*(z*dy + y*dz) - (3*y^2*z - z^3)"
)
LOG_SCALING = "p^2/u + w(x)*u"
_R1 = "dy^2 - dz^2 + w1(x)*(y^2 - z^2) - 2*y*z*w2(x)"
_R2 = "2*dy*dz + 2*w1(x)*y*z + w2(x)*(y^2 - z^2)"
LOG_SCALING_SYSTEM = realify.RealSystem.parse(
    f"(y*({_R1}) + z*({_R2}))/(y^2 + z^2)", f"(y*({_R2}) - z*({_R1}))/(y^2 + z^2)"
)
# w1 and w2 get different test bodies in each set
LOG_SCALING_FUNCS = _funcs(w1=["1 + t + t^2", "exp(t/4)", "1/(t + 3)"], w2=["exp(t/4)", "1/(t + 3)", "1 + t + t^2"])
PARABOLIC = "1 + (p - x)^2*w(2*u - x^2)"
PARABOLIC_UNIT_SYSTEM = realify.RealSystem.parse("1 + (dy - x)^2 - dz^2", "2*(dy - x)*dz")
NEGATIVE = "u*p"

CUBIC_DECAY_REAL_SOLUTION = odeint.ClosedFormSolution.parse(
    y="(2*(x - a1)*(x^2 - 2*a1*x - 2*b1) + 4*a2*(a2*x + b2))/((x^2 - 2*a1*x - 2*b1)^2 + (2*a2*x + 2*b2)^2)",
    z="(4*(x - a1)*(a2*x + b2) - 2*a2*(x^2 - 2*a1*x - 2*b1))/((x^2 - 2*a1*x - 2*b1)^2 + (2*a2*x + 2*b2)^2)",
    parameters=["a1", "a2", "b1", "b2"],
)


def _fixed(sol: odeint.ClosedFormSolution, **params) -> odeint.ClosedFormSolution:
    return odeint.ClosedFormSolution(sol.u, sol.y, sol.z, params, sol.param_boxes)


def _sol(**kw):
    return odeint.ClosedFormSolution.parse(**kw)


OSC_BOX = {"x": Box.real(0.1, 1.4)}
UNIT_W = _funcs(w=["1"])
INVERSE_W = _funcs(w=["1/t"])


def registry() -> list:
    return [
        Example("E1", "complexified Riccati equation", [
            Check("first-order map to U'=0", PASS,
                  complex_transform("-u^2", "0", "x", "1/u - x", order=1)),
            Check("solution u = 1/(x + c)", PASS,
                  solution("-u^2", _sol(u="1/(x + c)", parameters=["c"]), order=1)),
            Check("split map equals the printed real map", PASS,
                  realified_map_matches("x", "1/u - x", ("x", "y/(y^2 + z^2) - x", "-z/(y^2 + z^2)"))),
            Check("real map to Upsilon'=0, zeta'=0", PASS,
                  real_transform(RICCATI_SYSTEM, ("0", "0"), ("x", "y/(y^2 + z^2) - x", "-z/(y^2 + z^2)"))),
            Check("integration tracks y = 1/(1 + x)", PASS,
                  tracks(RICCATI_SYSTEM, _sol(y="1/(1 + x)", z="0"), (0.0, 2.0), 1e-6)),
        ]),
        Example("E2", "complexified harmonic oscillator", [
            Check("linearizable", PASS, linearizable("-u")),
            Check("map to U''=0", PASS, complex_transform("-u", "0", "tan(x)", "u*sec(x)", box=OSC_BOX)),
            Check("split map equals the printed real map", PASS,
                  realified_map_matches("tan(x)", "u*sec(x)", ("tan(x)", "y*sec(x)", "z*sec(x)"), box=OSC_BOX)),
            Check("real map to Upsilon''=0, zeta''=0", PASS,
                  real_transform(OSCILLATOR_SYSTEM, ("0", "0"), ("tan(x)", "y*sec(x)", "z*sec(x)"), box=OSC_BOX)),
            Check("complex general solution", PASS,
                  solution("-u", _sol(u="alpha*cos(x) + beta*sin(x)", parameters=["alpha", "beta"]))),
            Check("real general solution", PASS,
                  solution(OSCILLATOR_SYSTEM, _sol(y="a1*cos(x) + b1*sin(x)", z="a2*cos(x) + b2*sin(x)",
                                                   parameters=["a1", "a2", "b1", "b2"]))),
            Check("RK4 fourth-order convergence", PASS, rk4_convergence(OSCILLATOR_SYSTEM)),
        ]),
        Example("E3", "logarithmic scaling family with arbitrary w(x)", [
            Check("linearizable", PASS, linearizable(LOG_SCALING)),
            Check("Tresse invariants vanish", PASS, tresse(LOG_SCALING)),
            Check("derived real conditions", PASS, real_derived(LOG_SCALING)),
            Check("auxiliary pair k = 0, K = -1/(x + 1)", PASS,
                  auxiliary(LOG_SCALING, "0", "-1/(x + 1)", cubic.W_MEANS_K)),
            Check("symmetry x*u d/du", PASS, is_symmetry(LOG_SCALING, "0", "x*u")),
            Check("symmetry u d/du", PASS, is_symmetry(LOG_SCALING, "0", "u")),
            Check("classification", symmetry.T1_6, classification(LOG_SCALING, ("0", "x*u"), ("0", "u"))),
            Check("split brackets vanish", PASS, split_brackets(("0", "x*u"), ("0", "u"))),
            Check("log map to the linear equation", PASS,
                  complex_transform(LOG_SCALING, "w(1/chi)/chi^3", "1/x", "log(u)/x")),
            Check("split map equals chi = 1/x with atan2 angle", PASS,
                  realified_map_matches("1/x", "log(u)/x", ("1/x", "log(y^2 + z^2)/(2*x)", "atan2(z, y)/x"))),
            Check("split map equals printed chi = x/(x^2 + y^2)", FAIL,
                  realified_map_matches("1/x", "log(u)/x", ("x/(x^2 + y^2)", "log(y^2 + z^2)/(2*x)", "atan(z/y)/x")),
                  note="printed real map uses x/(x^2 + y^2) for chi"),
            Check("real map, derived target w/chi^3", PASS,
                  real_transform(LOG_SCALING_SYSTEM, ("w1(1/chi)/chi^3", "w2(1/chi)/chi^3"),
                                 ("1/x", "log(y^2 + z^2)/(2*x)", "atan2(z, y)/x"),
                                 ufunc_instantiations=LOG_SCALING_FUNCS)),
            Check("real map, printed target w/chi", FAIL,
                  real_transform(LOG_SCALING_SYSTEM, ("w1(1/chi)/chi", "w2(1/chi)/chi"),
                                 ("1/x", "log(y^2 + z^2)/(2*x)", "atan2(z, y)/x"),
                                 ufunc_instantiations=LOG_SCALING_FUNCS),
                  note="printed real target divides by chi instead of chi^3"),
        ]),
        Example("E4", "cubic decay u'' + 3uu' + u^3 = 0", [
            Check("linearizable", PASS, linearizable(CUBIC_DECAY)),
            Check("Tresse invariants vanish", PASS, tresse(CUBIC_DECAY)),
            Check("derived real conditions", PASS, real_derived(CUBIC_DECAY)),
            Check("printed real conditions audit", PASS, cross_check(CUBIC_DECAY),
                  note="details list printed-term mismatches"),
            Check("auxiliary pair k = 1/u, K = u, W = K", PASS,
                  auxiliary(CUBIC_DECAY, "1/u", "u", cubic.W_MEANS_K)),
            Check("auxiliary pair k = 1/u, K = u, W = k", FAIL,
                  auxiliary(CUBIC_DECAY, "1/u", "u", cubic.W_MEANS_k)),
            Check("symmetry d/dx", PASS, is_symmetry(CUBIC_DECAY, "1", "0")),
            Check("symmetry x d/dx - u d/du", PASS, is_symmetry(CUBIC_DECAY, "x", "-u")),
            Check("u d/du is not a symmetry", FAIL, is_symmetry(CUBIC_DECAY, "0", "u")),
            Check("classification", symmetry.T1_9, classification(CUBIC_DECAY, ("1", "0"), ("x", "-u"))),
            Check("split brackets vanish", FAIL, split_brackets(("1", "0"), ("x", "-u"))),
            Check("map to the canonical cubic form", PASS,
                  complex_transform(CUBIC_DECAY, "(-dU^3 + 6*dU^2 - 11*dU + 6)/chi", "1/u", "x + 1/u")),
            Check("canonical coefficients a = -1, b = 6", PASS,
                  canonical("(-dU^3 + 6*dU^2 - 11*dU + 6)/chi", -1, 6)),
            Check("canonical form rejects a = 0", PASS, canonical_rejects_zero()),
            Check("linearizing map to U''=0", PASS,
                  complex_transform(CUBIC_DECAY, "0", "x - 1/u", "x^2/2 - x/u")),
            Check("linearizing map needs analytic continuation", PASS,
                  analytic_continuation("x - 1/u", "x^2/2 - x/u")),
            Check("identity map is not linearizing", FAIL, identity_transform(CUBIC_DECAY, "0")),
            Check("complex general solution", PASS,
                  solution(CUBIC_DECAY, _sol(u="2*(x - alpha)/(x^2 - 2*alpha*x - 2*beta)",
                                             parameters=["alpha", "beta"]))),
            Check("real general solution", PASS, solution(CUBIC_DECAY_SYSTEM, CUBIC_DECAY_REAL_SOLUTION)),
            Check("integration tracks the real solution", PASS,
                  tracks(CUBIC_DECAY_SYSTEM, _fixed(CUBIC_DECAY_REAL_SOLUTION, a1=0, a2=1, b1=0, b2=0),
                         (0.5, 2.5), 1e-5)),
        ]),
        Example("E5", "parabolic family u'' = 1 + (u' - x)^2 w(2u - x^2)", [
            Check("linearizable", PASS, linearizable(PARABOLIC)),
            Check("Tresse invariants vanish", PASS, tresse(PARABOLIC)),
            Check("derived real conditions", PASS, real_derived(PARABOLIC)),
            Check("symmetry d/dx + x d/du", PASS, is_symmetry(PARABOLIC, "1", "x")),
            Check("symmetry x d/dx + x^2 d/du", PASS, is_symmetry(PARABOLIC, "x", "x^2")),
            Check("classification", symmetry.T1_7, classification(PARABOLIC, ("1", "x"), ("x", "x^2"))),
            Check("map to U'' = -U' w(chi)/2", PASS,
                  complex_transform(PARABOLIC, "-dU*w(chi)/2", "2*u - x^2", "x")),
            Check("map needs analytic continuation", PASS, analytic_continuation("2*u - x^2", "x")),
            Check("printed real conditions for w = 1", PASS,
                  printed_real_direct(B1="1", C1="-2*x", D1="1 + x^2")),
            Check("log solution for w = 1", PASS,
                  solution(PARABOLIC, _sol(u=f"alpha + {LN2} + x^2/2 - log(beta - x)", parameters=["alpha", "beta"]),
                           ufunc_instantiations=UNIT_W)),
            Check("real log solution, corrected angle", PASS,
                  solution(PARABOLIC_UNIT_SYSTEM,
                           _sol(y=f"a1 - {LN2} + x^2/2 - log((b1 - x)^2 + b2^2)/2", z="a2 - atan(b2/(b1 - x))",
                                parameters=["a1", "a2", "b1", "b2"]))),
            Check("real log solution, printed angle", FAIL,
                  solution(PARABOLIC_UNIT_SYSTEM,
                           _sol(y=f"a1 - {LN2} + x^2/2 - log((b1 - x)^2 + b2^2)/2", z="a2 - atan(b2/(b2 - x))",
                                parameters=["a1", "a2", "b1", "b2"])),
                  note="printed angle uses b2/(b2 - x)"),
            Check("printed square-root solution for w = 1/t", FAIL,
                  solution(PARABOLIC, _sol(u="x^2/2 + sqrt((beta - x)/alpha)/sqrt(2)", parameters=["alpha", "beta"]),
                           ufunc_instantiations=INVERSE_W),
                  note="printed closed form does not satisfy the equation"),
            Check("derived quadratic solution for w = 1/t", PASS,
                  solution(PARABOLIC, _sol(u="x^2/2 + (x - beta)^2/(8*alpha^2)", parameters=["alpha", "beta"]),
                           ufunc_instantiations=INVERSE_W)),
        ]),
        Example("N1", "negative control u'' = u u'", [
            Check("linearizable", FAIL, linearizable(NEGATIVE)),
            Check("Tresse invariants vanish", FAIL, tresse(NEGATIVE)),
            Check("derived real conditions", FAIL, real_derived(NEGATIVE)),
            Check("printed real conditions for C1 = y", FAIL, printed_real_direct(C1="y")),
        ]),
    ]


def find(example_id: str) -> Example:
    for e in registry():
        if e.id.lower() == example_id.lower():
            return e
    raise KeyError(example_id)


def run_example(example: Example, cfg: SamplingConfig | None = None) -> dict:
    cfg = cfg or SamplingConfig()
    rows = []
    for check in example.checks:
        try:
            result = check.run(cfg)
        except Exception as exc:  # a crashing check counts as an unexpected outcome
            result = CheckResult("error", float("nan"), 0, {"error": f"{type(exc).__name__}: {exc}"})
        row = {
            "name": f"{example.id}: {check.name}",
            "expected": check.expected,
            "outcome": result.outcome,
            "max_residual": result.max_residual,
            "samples": result.samples,
            "verdict": PASS if result.outcome == check.expected else FAIL,
        }
        if check.note:
            row["note"] = check.note
        if result.details:
            row["details"] = result.details
        rows.append(row)
    return {
        "id": example.id,
        "title": example.title,
        "checks": rows,
        "verdict": PASS if all(r["verdict"] == PASS for r in rows) else FAIL,
    }
