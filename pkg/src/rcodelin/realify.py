"""Real systems obtained by splitting ``u = y + i z``.

Coefficients of a realified equation are kept as closures over the complex
source: ``A1(x, y, z) = Re A(x, y + i z)``. Partial derivatives are taken on
the source and split afterwards, using ``d/dy = d/du`` and ``d/dz = i d/du``
for functions analytic in ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import comb

from .cubic import COEFF_SYMBOLS, LIE_TERMS, ComplexCubicODE, lie_residuals_complex
from .expr import (
    Bindings,
    DomainError,
    Expr,
    diff,
    evaluator,
    parse,
    split_terms,
    ufunc_names,
)
from .sampling import (
    FunctionCondition,
    PointSampler,
    ResidualReport,
    SamplingConfig,
    normalized,
    run_conditions,
)

REAL_SYMBOLS = ("x", "y", "z")
REAL_SYSTEM_SYMBOLS = ("x", "y", "z", "dy", "dz")


class RealPoint:
    """A point ``(x, y, z)`` with evaluators for split and direct functions."""

    def __init__(self, x: float, y: float, z: float, functions=None):
        self.x, self.y, self.z = float(x), float(y), float(z)
        self.functions = functions or {}
        self._complex = None
        self._real = None

    @classmethod
    def from_complex_sample(cls, values: dict, functions=None) -> "RealPoint":
        u = complex(values["u"])
        return cls(complex(values["x"]).real, u.real, u.imag, functions)

    @property
    def complex_run(self):
        if self._complex is None:
            b = Bindings({"x": self.x, "u": complex(self.y, self.z)}, self.functions)
            self._complex = evaluator(b)
        return self._complex

    @property
    def real_run(self):
        if self._real is None:
            b = Bindings({"x": self.x, "y": self.y, "z": self.z}, self.functions)
            self._real = evaluator(b)
        return self._real

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z}


class RealFunction:
    """Real-valued function of ``(x, y, z)`` with symbolic partials."""

    def value(self, pt: RealPoint) -> float:
        raise NotImplementedError

    def _partial(self, var: str) -> "RealFunction":
        raise NotImplementedError

    def partial(self, var: str) -> "RealFunction":
        cache = self.__dict__.setdefault("_partials", {})
        if var not in cache:
            if var not in REAL_SYMBOLS:
                raise ValueError(f"cannot differentiate with respect to {var!r}")
            cache[var] = self._partial(var)
        return cache[var]

    def derivative(self, nx: int = 0, ny: int = 0, nz: int = 0) -> "RealFunction":
        f = self
        for var, n in (("x", nx), ("y", ny), ("z", nz)):
            for _ in range(n):
                f = f.partial(var)
        return f


class SplitFunction(RealFunction):
    """``scale * Re f(x, y + i z)`` or ``scale * Im f(x, y + i z)``."""

    def __init__(self, source: Expr, part: str, scale: float = 1.0):
        if part not in ("re", "im"):
            raise ValueError(part)
        self.source = source
        self.part = part
        self.scale = scale

    def value(self, pt):
        v = pt.complex_run(self.source)
        return self.scale * (v.real if self.part == "re" else v.imag)

    def _partial(self, var):
        if var == "x":
            return SplitFunction(diff(self.source, "x"), self.part, self.scale)
        f_u = diff(self.source, "u")
        if var == "y":
            return SplitFunction(f_u, self.part, self.scale)
        # d/dz Re f = -Im f_u, d/dz Im f = Re f_u
        if self.part == "re":
            return SplitFunction(f_u, "im", -self.scale)
        return SplitFunction(f_u, "re", self.scale)

    def __repr__(self):
        return f"SplitFunction({self.source}, {self.part!r}, {self.scale})"


class DirectFunction(RealFunction):
    """Function given directly as an expression in ``x, y, z``."""

    def __init__(self, expr: Expr):
        self.expr = expr

    def value(self, pt):
        return pt.real_run(self.expr).real

    def _partial(self, var):
        return DirectFunction(diff(self.expr, var))

    def __repr__(self):
        return f"DirectFunction({self.expr})"


COEFFICIENT_NAMES = ("A", "B", "C", "D")


@dataclass
class RealCubicSystem:
    """Coefficients ``A1 .. D2`` of the realified cubic system.

    ``parts[("A", 1)]`` is ``A1`` and so on. ``source`` is the complex parent
    when the system came from :func:`realify_system`.
    """

    parts: dict
    source: ComplexCubicODE | None = None
    symbolic: dict = field(default_factory=dict)

    def coefficient(self, letter: str, part: int, nx=0, ny=0, nz=0) -> RealFunction:
        return self.parts[(letter, part)].derivative(nx, ny, nz)

    def ufunc_names(self) -> frozenset:
        names = set()
        for f in self.parts.values():
            expr = f.source if isinstance(f, SplitFunction) else f.expr
            names |= ufunc_names(expr)
        return frozenset(names)

    def rhs(self, pt: RealPoint, dy: float, dz: float) -> tuple:
        """``(y'', z'')`` following the printed term pattern of the split system."""
        v = {key: f.value(pt) for key, f in self.parts.items()}
        A1, A2 = v[("A", 1)], v[("A", 2)]
        B1, B2 = v[("B", 1)], v[("B", 2)]
        C1, C2 = v[("C", 1)], v[("C", 2)]
        D1, D2 = v[("D", 1)], v[("D", 2)]
        ypp = (
            A1 * (dy**3 - 3 * dy * dz**2)
            - A2 * (3 * dy**2 * dz - dz**3)
            + B1 * (dy**2 - dz**2)
            - 2 * B2 * dy * dz
            + C1 * dy
            - C2 * dz
            + D1
        )
        zpp = (
            A1 * (3 * dy**2 * dz - dz**3)
            + A2 * (dy**3 - 3 * dy * dz**2)
            + 2 * B1 * dy * dz
            + B2 * (dy**2 - dz**2)
            + C2 * dy
            + C1 * dz
            + D2
        )
        return ypp, zpp

    @classmethod
    def direct(cls, **coefficients) -> "RealCubicSystem":
        """System entered by hand, e.g. ``direct(C1="y")``; missing parts are 0."""
        parts = {}
        symbolic = {}
        for letter in COEFFICIENT_NAMES:
            for part in (1, 2):
                text = coefficients.pop(f"{letter}{part}", "0")
                expr = parse(text, REAL_SYMBOLS) if isinstance(text, str) else text
                parts[(letter, part)] = DirectFunction(expr)
                symbolic[(letter, part)] = expr
        if coefficients:
            raise TypeError(f"unknown coefficients {sorted(coefficients)}")
        return cls(parts, None, symbolic)


def realify_system(ode: ComplexCubicODE) -> RealCubicSystem:
    parts = {}
    for letter, expr in ode.coefficients().items():
        parts[(letter, 1)] = SplitFunction(expr, "re")
        parts[(letter, 2)] = SplitFunction(expr, "im")
    return RealCubicSystem(parts, ode)


def _f(letter, part, nx=0, ny=0, nz=0):
    return (letter, part, nx, ny, nz)


# The four real conditions exactly as printed, one (coefficient, factors) pair
# per monomial. Factor (letter, part, nx, ny, nz) means letter^part_{x^nx y^ny z^nz}.
PRINTED_TERMS = {
    "real1": [
        (3, [_f("A", 1, 2)]),
        (3, [_f("C", 1), _f("A", 1, 1)]),
        (-3, [_f("A", 2, 1), _f("C", 2)]),
        (-3, [_f("A", 1, 0, 1), _f("D", 1)]),
        (-3, [_f("D", 1), _f("A", 2, 0, 0, 1)]),
        (3, [_f("D", 2), _f("A", 2, 0, 1)]),
        (-3, [_f("D", 2), _f("A", 1, 0, 0, 1)]),
        (3, [_f("A", 1), _f("C", 1, 1)]),
        (-3, [_f("A", 2), _f("C", 2, 1)]),
        (1, [_f("C", 1, 0, 2)]),
        (-1, [_f("C", 1, 0, 0, 2)]),
        (2, [_f("C", 2, 0, 1, 1)]),
        (-6, [_f("A", 1), _f("D", 1, 0, 1)]),
        (-6, [_f("A", 1), _f("D", 2, 0, 0, 1)]),
        (6, [_f("A", 2), _f("D", 2, 0, 1)]),
        (-6, [_f("A", 2), _f("D", 1, 0, 0, 1)]),
        (1, [_f("B", 1), _f("C", 1, 0, 1)]),
        (1, [_f("B", 1), _f("C", 2, 0, 0, 1)]),
        (-1, [_f("B", 2), _f("C", 2, 0, 1)]),
        (1, [_f("B", 2), _f("C", 1, 0, 0, 1)]),
        (-2, [_f("B", 1), _f("B", 1, 1)]),
        (2, [_f("B", 2), _f("B", 2, 1)]),
        (-2, [_f("B", 1, 1, 1)]),
        (-2, [_f("B", 2, 1, 0, 1)]),
    ],
    "real2": [
        (3, [_f("A", 2, 2)]),
        (3, [_f("C", 2), _f("A", 1, 1)]),
        (3, [_f("A", 2, 1), _f("C", 1)]),
        (-3, [_f("D", 2), _f("A", 1, 0, 1)]),
        (-3, [_f("D", 2), _f("A", 2, 0, 0, 1)]),
        (-3, [_f("D", 1), _f("A", 2, 0, 1)]),
        (3, [_f("D", 1), _f("A", 1, 0, 0, 1)]),
        (3, [_f("A", 2), _f("C", 1, 1)]),
        (-3, [_f("A", 1), _f("C", 1, 1)]),
        (1, [_f("C", 2, 0, 2)]),
        (-1, [_f("C", 2, 0, 0, 2)]),
        (-2, [_f("C", 1, 0, 1, 1)]),
        (-6, [_f("A", 2), _f("D", 1, 0, 1)]),
        (-6, [_f("A", 2), _f("D", 2, 0, 0, 1)]),
        (-6, [_f("A", 1), _f("D", 2, 0, 1)]),
        (6, [_f("A", 1), _f("D", 1, 0, 0, 1)]),
        (1, [_f("B", 2), _f("C", 1, 0, 1)]),
        (1, [_f("B", 2), _f("C", 2, 0, 0, 1)]),
        (1, [_f("B", 1), _f("C", 2, 0, 1)]),
        (-1, [_f("B", 1), _f("C", 1, 0, 0, 1)]),
        (-2, [_f("B", 2), _f("B", 1, 1)]),
        (-2, [_f("B", 1), _f("B", 2, 1)]),
        (-2, [_f("B", 2, 1, 1)]),
        (2, [_f("B", 1, 1, 0, 1)]),
    ],
    "real3": [
        (6, [_f("D", 1), _f("A", 1, 1)]),
        (-6, [_f("D", 2), _f("A", 2, 1)]),
        (-3, [_f("D", 1), _f("B", 1, 0, 1)]),
        (-3, [_f("D", 1), _f("B", 2, 0, 0, 1)]),
        (3, [_f("D", 2), _f("B", 2, 0, 1)]),
        (-3, [_f("D", 2), _f("B", 1, 0, 0, 1)]),
        (3, [_f("A", 1), _f("D", 1, 1)]),
        (-3, [_f("A", 2), _f("D", 2, 1)]),
        (1, [_f("B", 1, 2)]),
        (-2, [_f("C", 1, 1, 1)]),
        (-2, [_f("C", 2, 1, 0, 1)]),
        (-3, [_f("B", 1), _f("D", 1, 0, 1)]),
        (-3, [_f("B", 1), _f("D", 2, 0, 0, 1)]),
        (3, [_f("B", 2), _f("D", 2, 0, 0, 1)]),
        (-3, [_f("B", 2), _f("D", 1, 0, 0, 1)]),
        (3, [_f("D", 1, 0, 2)]),
        (-3, [_f("D", 1, 0, 0, 2)]),
        (6, [_f("D", 2, 0, 1, 1)]),
        (2, [_f("C", 1), _f("C", 1, 0, 1)]),
        (2, [_f("C", 1), _f("C", 2, 0, 0, 1)]),
        (-2, [_f("C", 2), _f("C", 2, 0, 1)]),
        (2, [_f("C", 2), _f("C", 1, 0, 0, 1)]),
        (-1, [_f("C", 1), _f("B", 1, 1)]),
        (1, [_f("C", 2), _f("B", 2, 1)]),
    ],
    "real4": [
        (6, [_f("D", 2), _f("A", 1, 1)]),
        (6, [_f("D", 1), _f("A", 2, 1)]),
        (-3, [_f("D", 2), _f("B", 1, 0, 1)]),
        (-3, [_f("D", 2), _f("B", 2, 0, 0, 1)]),
        (-3, [_f("D", 1), _f("B", 2, 0, 1)]),
        (3, [_f("D", 1), _f("B", 1, 0, 0, 1)]),
        (3, [_f("A", 2), _f("D", 1, 1)]),
        (3, [_f("A", 1), _f("D", 2, 1)]),
        (1, [_f("B", 2, 2)]),
        (-2, [_f("C", 2, 1, 1)]),
        (2, [_f("C", 1, 1, 0, 1)]),
        (-3, [_f("B", 2), _f("D", 1, 0, 1)]),
        (-3, [_f("B", 2), _f("D", 2, 0, 0, 1)]),
        (-3, [_f("B", 1), _f("D", 2, 0, 1)]),
        (3, [_f("B", 1), _f("D", 1, 0, 0, 1)]),
        (3, [_f("D", 2, 0, 2)]),
        (-3, [_f("D", 2, 0, 0, 2)]),
        (-6, [_f("D", 1, 0, 1, 1)]),
        (2, [_f("C", 2), _f("C", 1, 0, 1)]),
        (-2, [_f("C", 2), _f("C", 2, 0, 0, 1)]),
        (2, [_f("C", 1), _f("C", 2, 0, 1)]),
        (-2, [_f("C", 1), _f("C", 1, 0, 0, 1)]),
        (-1, [_f("C", 2), _f("B", 1, 1)]),
        (-1, [_f("C", 1), _f("B", 2, 1)]),
    ],
}

REAL_CONDITION_NAMES = ("real1", "real2", "real3", "real4")
# real condition -> (complex condition, part)
REAL_FROM_COMPLEX = {
    "real1": ("R1", "re"),
    "real2": ("R1", "im"),
    "real3": ("R2", "re"),
    "real4": ("R2", "im"),
}


def _split_factor(letter, nx, nu):
    """Expand ``F_{x^nx u^nu}`` with ``d/du -> d/dy - i d/dz`` and ``F = F1 + i F2``.

    Returns ``[(complex coefficient, real factor), ...]``.
    """
    out = []
    for j in range(nu + 1):
        c = comb(nu, j) * (-1j) ** j
        out.append((c, (letter, 1, nx, nu - j, j)))
        out.append((c * 1j, (letter, 2, nx, nu - j, j)))
    return out


def _canonical(terms) -> dict:
    acc: dict = {}
    for coef, factors in terms:
        key = tuple(sorted(factors))
        acc[key] = acc.get(key, 0) + coef
    return {k: v for k, v in acc.items() if v != 0}


def derived_real_terms() -> dict:
    """Term tables obtained by splitting the complex conditions into Re and Im.

    Uses the same ``d/du -> d/dy - i d/dz`` vocabulary as the printed tables,
    so the two can be compared monomial by monomial.
    """
    out = {}
    for real_name, (cname, part) in REAL_FROM_COMPLEX.items():
        terms = []
        for coef, factors in LIE_TERMS[cname]:
            expansions = [_split_factor(*f) for f in factors]
            for combo in product(*expansions):
                c = complex(coef)
                reals = []
                for fc, rf in combo:
                    c *= fc
                    reals.append(rf)
                value = c.real if part == "re" else c.imag
                value = round(value)
                if value:
                    terms.append((value, reals))
        out[real_name] = _canonical(terms)
    return out


def printed_real_terms() -> dict:
    return {name: _canonical(terms) for name, terms in PRINTED_TERMS.items()}


def format_factor(f) -> str:
    letter, part, nx, ny, nz = f
    sub = "x" * nx + "y" * ny + "z" * nz
    return f"{letter}{part}" + (f"_{sub}" if sub else "")


def format_term(coef, factors) -> str:
    return f"{coef:+d}*" + "*".join(format_factor(f) for f in factors)


def term_mismatches() -> dict:
    """Monomials whose coefficient differs between printed and derived tables."""
    printed = printed_real_terms()
    derived = derived_real_terms()
    out = {}
    for name in REAL_CONDITION_NAMES:
        rows = []
        for key in sorted(set(printed[name]) | set(derived[name])):
            a = printed[name].get(key, 0)
            b = derived[name].get(key, 0)
            if a != b:
                rows.append({"factors": key, "printed": a, "derived": b})
        out[name] = rows
    return out


def _term_value(system: RealCubicSystem, coef, factors, pt) -> float:
    v = float(coef)
    for letter, part, nx, ny, nz in factors:
        v *= system.coefficient(letter, part, nx, ny, nz).value(pt)
    return v


def _table_value(system, table, pt) -> tuple:
    values = [_term_value(system, coef, factors, pt) for coef, factors in table]
    return sum(values), sum(abs(v) for v in values)


def real_residuals_printed(system: RealCubicSystem) -> dict:
    """Closures ``pt -> (value, scale)`` for the four real conditions as printed."""
    tables = {name: PRINTED_TERMS[name] for name in REAL_CONDITION_NAMES}
    return {name: (lambda pt, t=t: _table_value(system, t, pt)) for name, t in tables.items()}


def real_residuals_convention(system: RealCubicSystem) -> dict:
    """Closures for the Re/Im split in the printed derivative vocabulary."""
    tables = derived_real_terms()
    return {
        name: (lambda pt, t=[(c, list(k)) for k, c in tables[name].items()]: _table_value(system, t, pt))
        for name in REAL_CONDITION_NAMES
    }


def real_residuals_derived(ode: ComplexCubicODE) -> dict:
    """``Re R1, Im R1, Re R2, Im R2`` at ``u = y + i z``; the normative real test."""
    r1, r2 = lie_residuals_complex(ode)
    parents = {"R1": split_terms(r1), "R2": split_terms(r2)}

    def make(cname, part):
        terms = parents[cname]

        def closure(pt: RealPoint):
            values = [pt.complex_run(t) for t in terms]
            total = sum(values, 0j)
            scale = sum(abs(v) for v in values)
            return (total.real if part == "re" else total.imag), scale

        return closure

    return {name: make(*REAL_FROM_COMPLEX[name]) for name in REAL_CONDITION_NAMES}


def _real_conditions(closures: dict) -> list:
    def wrap(fn):
        def evaluate(bindings, run):
            pt = RealPoint.from_complex_sample(bindings.values, bindings.functions)
            value, scale = fn(pt)
            return complex(value), scale

        return evaluate

    return [FunctionCondition(name, wrap(fn)) for name, fn in closures.items()]


def check_linearizable_real(ode: ComplexCubicODE, cfg: SamplingConfig | None = None) -> ResidualReport:
    """Derived real conditions on the split of ``ode`` (same points as the complex check)."""
    cfg = cfg or SamplingConfig()
    conds = _real_conditions(real_residuals_derived(ode))
    return run_conditions(conds, cfg, COEFF_SYMBOLS, ode.ufunc_names())


def check_printed_real(system: RealCubicSystem, cfg: SamplingConfig | None = None) -> ResidualReport:
    cfg = cfg or SamplingConfig()
    conds = _real_conditions(real_residuals_printed(system))
    return run_conditions(conds, cfg, COEFF_SYMBOLS, system.ufunc_names())


def cross_check_conditions(ode: ComplexCubicODE, cfg: SamplingConfig | None = None) -> dict:
    """Compare printed real conditions with the Re/Im split of the complex ones.

    Returns a JSON-ready discrepancy report with per-condition deviations,
    witness points, and the monomials where the printed tables disagree with
    the split.
    """
    cfg = cfg or SamplingConfig()
    system = realify_system(ode)
    printed = real_residuals_printed(system)
    convention = real_residuals_convention(system)
    derived = real_residuals_derived(ode)
    mismatches = term_mismatches()
    derived_tables = derived_real_terms()

    stats = {
        name: {
            "max_derived_residual": 0.0,
            "max_printed_residual": 0.0,
            "max_printed_vs_derived": 0.0,
            "max_printed_vs_split_vocabulary": 0.0,
            "witness": None,
        }
        for name in REAL_CONDITION_NAMES
    }
    term_witness = {name: [None] * len(mismatches[name]) for name in REAL_CONDITION_NAMES}
    samples = 0
    for functions in cfg.instantiation_sets(ode.ufunc_names()):
        sampler = PointSampler(cfg, COEFF_SYMBOLS)
        for _ in range(cfg.points):
            for _attempt in range(cfg.retry_limit):
                pt = RealPoint.from_complex_sample(sampler.draw(), functions)
                try:
                    values = {
                        name: (derived[name](pt), printed[name](pt), convention[name](pt))
                        for name in REAL_CONDITION_NAMES
                    }
                    term_values = {
                        name: [
                            (
                                _term_value(system, row["printed"], row["factors"], pt),
                                _term_value(system, row["derived"], row["factors"], pt),
                            )
                            for row in mismatches[name]
                        ]
                        for name in REAL_CONDITION_NAMES
                    }
                except (DomainError, ZeroDivisionError, ArithmeticError):
                    continue
                break
            else:
                continue
            samples += 1
            for name, ((d, d_scale), (p, p_scale), (c, _)) in values.items():
                s = stats[name]
                s["max_derived_residual"] = max(s["max_derived_residual"], normalized(d, d_scale))
                s["max_printed_residual"] = max(s["max_printed_residual"], normalized(p, p_scale))
                dev = abs(p - d)
                if s["witness"] is None or dev > s["max_printed_vs_derived"]:
                    s["max_printed_vs_derived"] = dev
                    s["witness"] = {"point": pt.as_dict(), "printed": p, "derived": d}
                s["max_printed_vs_split_vocabulary"] = max(
                    s["max_printed_vs_split_vocabulary"], abs(p - c)
                )
                for k, (tp, td) in enumerate(term_values[name]):
                    gap = abs(tp - td)
                    current = term_witness[name][k]
                    if current is None or gap > current["gap"]:
                        term_witness[name][k] = {
                            "point": pt.as_dict(),
                            "printed_value": tp,
                            "derived_value": td,
                            "gap": gap,
                        }

    conditions = []
    for name in REAL_CONDITION_NAMES:
        rows = []
        for row, witness in zip(mismatches[name], term_witness[name]):
            rows.append(
                {
                    "factors": [format_factor(f) for f in row["factors"]],
                    "printed_coefficient": row["printed"],
                    "derived_coefficient": row["derived"],
                    "witness": witness,
                }
            )
        entry = {"name": name, "split_of": "%s(%s)" % (REAL_FROM_COMPLEX[name][1].capitalize(), REAL_FROM_COMPLEX[name][0])}
        entry.update(stats[name])
        entry["printed_terms"] = len(PRINTED_TERMS[name])
        entry["derived_terms"] = len(derived_tables[name])
        entry["term_mismatches"] = rows
        conditions.append(entry)
    return {
        "samples": samples,
        "seed": cfg.seed,
        "conditions": conditions,
        "derived_pass": all(s["max_derived_residual"] <= cfg.tolerance for s in stats.values()),
        "printed_pass": all(s["max_printed_residual"] <= cfg.tolerance for s in stats.values()),
    }


class RealSystem:
    """Explicit real system ``y^(n) = fy, z^(n) = fz`` for ``n = order`` (1 or 2).

    Right-hand sides are expressions over ``x, y, z`` (and ``dy, dz`` when
    second order), or the real and imaginary parts of one complex right-hand
    side in ``x, u`` (and ``p``).
    """

    def __init__(self, fy: Expr | None, fz: Expr | None, order: int = 2, complex_rhs: Expr | None = None):
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if complex_rhs is None and (fy is None or fz is None):
            raise ValueError("need fy and fz, or a complex right-hand side")
        self.fy, self.fz = fy, fz
        self.order = order
        self.complex_rhs = complex_rhs

    @property
    def symbols(self) -> tuple:
        return REAL_SYSTEM_SYMBOLS if self.order == 2 else REAL_SYMBOLS

    @classmethod
    def parse(cls, fy: str, fz: str, order: int = 2) -> "RealSystem":
        syms = REAL_SYSTEM_SYMBOLS if order == 2 else REAL_SYMBOLS
        return cls(parse(fy, syms), parse(fz, syms), order)

    @classmethod
    def from_complex(cls, w: Expr, order: int = 2) -> "RealSystem":
        return cls(None, None, order, w)

    def ufunc_names(self) -> frozenset:
        if self.complex_rhs is not None:
            return ufunc_names(self.complex_rhs)
        return ufunc_names(self.fy) | ufunc_names(self.fz)

    def evaluate(self, x, y, z, dy=0.0, dz=0.0, functions=None) -> tuple:
        functions = functions or {}
        if self.complex_rhs is not None:
            values = {"x": x, "u": complex(y, z), "p": complex(dy, dz)}
            v = evaluator(Bindings(values, functions))(self.complex_rhs)
            return v.real, v.imag
        values = {"x": x, "y": y, "z": z, "dy": dy, "dz": dz}
        run = evaluator(Bindings(values, functions))
        return run(self.fy).real, run(self.fz).real


def cubic_as_system(system: RealCubicSystem) -> "CubicRealSystem":
    return CubicRealSystem(system)


class CubicRealSystem(RealSystem):
    """A :class:`RealCubicSystem` seen as an explicit second-order system."""

    def __init__(self, cubic: RealCubicSystem):
        self.cubic = cubic
        self.order = 2
        self.fy = self.fz = self.complex_rhs = None

    def ufunc_names(self):
        return self.cubic.ufunc_names()

    def evaluate(self, x, y, z, dy=0.0, dz=0.0, functions=None):
        return self.cubic.rhs(RealPoint(x, y, z, functions), dy, dz)
