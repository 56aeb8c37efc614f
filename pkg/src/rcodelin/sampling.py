"""Seeded numeric identity testing.

An expression is declared identically zero when its normalized residual
``|sum| / (1 + sum of |terms|)`` stays below tolerance at every point of a
deterministic pseudo-random sample. Points where evaluation fails are redrawn.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .expr import Bindings, DomainError, Expr, NonFinite, evaluator, parse, split_terms

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

DEFAULT_INSTANTIATIONS = ("1 + t + t^2", "exp(t/4)", "1/(t + 3)")

_MAX_RECORDED_FAILURES = 5


@dataclass(frozen=True)
class Box:
    """Rectangle ``re x im`` in the complex plane a symbol is drawn from."""

    re: tuple = (-2.0, 2.0)
    im: tuple = (-2.0, 2.0)

    @property
    def is_real(self) -> bool:
        return self.im[0] == self.im[1] == 0.0

    @classmethod
    def real(cls, lo: float, hi: float) -> "Box":
        return cls((float(lo), float(hi)), (0.0, 0.0))


DEFAULT_BOXES = {"x": Box.real(0.1, 2.1)}


def default_family() -> tuple:
    return tuple(parse(s, {"t"}) for s in DEFAULT_INSTANTIATIONS)


@dataclass(frozen=True)
class SamplingConfig:
    points: int = 64
    seed: int = 42
    box: Mapping[str, Box] = field(default_factory=dict)
    retry_limit: int = 100
    tolerance: float = 1e-8
    ufunc_instantiations: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        # bodies may be given as strings in the placeholder ``t``
        bodies = {}
        for name, v in self.ufunc_instantiations.items():
            if isinstance(v, (str, Expr)):
                v = [v]
            bodies[name] = tuple(parse(b, {"t"}) if isinstance(b, str) else b for b in v)
        object.__setattr__(self, "ufunc_instantiations", bodies)
        if self.points < 8:
            raise ValueError("at least 8 sample points are required")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.retry_limit < 1:
            raise ValueError("retry_limit must be at least 1")

    def box_for(self, symbol: str) -> Box:
        if symbol in self.box:
            return self.box[symbol]
        return DEFAULT_BOXES.get(symbol, Box())

    def instantiation_sets(self, names) -> list:
        """One ``{name: body}`` mapping per test instantiation.

        Set ``k`` gives every function symbol its ``k``-th test body (cycling
        through shorter lists), so the number of sets is the longest list.
        """
        names = sorted(names)
        if not names:
            return [{}]
        family = default_family()
        bodies = {n: tuple(self.ufunc_instantiations.get(n, family)) for n in names}
        count = max(len(b) for b in bodies.values())
        return [{n: b[k % len(b)] for n, b in bodies.items()} for k in range(count)]

    def with_overrides(self, **changes) -> "SamplingConfig":
        fields = dict(
            points=self.points,
            seed=self.seed,
            box=dict(self.box),
            retry_limit=self.retry_limit,
            tolerance=self.tolerance,
            ufunc_instantiations=dict(self.ufunc_instantiations),
        )
        fields.update({k: v for k, v in changes.items() if v is not None})
        return SamplingConfig(**fields)


def normalized(value: complex, scale: float) -> float:
    return abs(value) / (1.0 + scale)


@dataclass
class ConditionResult:
    name: str
    max_normalized_residual: float
    sample_count: int
    failed_samples: list = field(default_factory=list)
    witness: dict | None = None

    def passed(self, tolerance: float) -> bool:
        return self.max_normalized_residual <= tolerance

    def to_dict(self, tolerance: float) -> dict:
        return {
            "name": self.name,
            "max_residual": self.max_normalized_residual,
            "samples": self.sample_count,
            "verdict": PASS if self.passed(tolerance) else FAIL,
            "witness": self.witness,
        }


@dataclass
class ResidualReport:
    conditions: list
    seed: int
    tolerance: float
    singular_samples: int = 0
    total_samples: int = 0
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.total_samples and self.singular_samples * 2 > self.total_samples:
            return INCONCLUSIVE
        if all(c.passed(self.tolerance) for c in self.conditions):
            return PASS
        return FAIL

    @property
    def max_residual(self) -> float:
        return max((c.max_normalized_residual for c in self.conditions), default=0.0)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "conditions": [c.to_dict(self.tolerance) for c in self.conditions],
            "verdict": self.verdict,
            "seed": self.seed,
            "singular_samples": self.singular_samples,
            "total_samples": self.total_samples,
            "notes": list(self.notes),
        }


class Condition:
    """Something that yields ``(value, scale)`` at a sample point."""

    name: str

    def evaluate(self, bindings: Bindings, run) -> tuple:
        raise NotImplementedError


class ExprCondition(Condition):
    """Residual given as an expression; the scale is the sum of |summands|."""

    def __init__(self, name: str, expr: Expr):
        self.name = name
        self.expr = expr
        self.terms = split_terms(expr)

    def evaluate(self, bindings, run):
        values = [run(t) for t in self.terms]
        return sum(values, 0j), sum(abs(v) for v in values)


class FunctionCondition(Condition):
    def __init__(self, name: str, fn: Callable):
        self.name = name
        self.fn = fn

    def evaluate(self, bindings, run):
        return self.fn(bindings, run)


def _json_point(values: Mapping[str, complex]) -> dict:
    out = {}
    for k in sorted(values):
        v = complex(values[k])
        out[k] = v.real if v.imag == 0 else [v.real, v.imag]
    return out


class PointSampler:
    """Deterministic stream of sample points for a fixed symbol order."""

    def __init__(self, cfg: SamplingConfig, symbols: Sequence[str], seed_offset: int = 0):
        self.cfg = cfg
        self.symbols = list(symbols)
        self.rng = np.random.default_rng(cfg.seed + seed_offset)

    def draw(self) -> dict:
        point = {}
        for s in self.symbols:
            box = self.cfg.box_for(s)
            re = self.rng.uniform(*box.re)
            im = self.rng.uniform(*box.im)
            point[s] = complex(re, im)
        return point


def run_conditions(
    conditions: Sequence[Condition],
    cfg: SamplingConfig,
    symbols: Sequence[str],
    ufunc_names=(),
    fixed: Mapping[str, complex] | None = None,
    accept: Callable[[dict], bool] | None = None,
) -> ResidualReport:
    """Evaluate every condition on ``cfg.points`` points per instantiation set.

    ``fixed`` holds extra bindings (e.g. solution constants) shared by all
    points; ``accept`` can veto a drawn point before evaluation.
    """
    results = {c.name: ConditionResult(c.name, 0.0, 0) for c in conditions}
    singular = 0
    total = 0
    for functions in cfg.instantiation_sets(ufunc_names):
        sampler = PointSampler(cfg, symbols)
        for _ in range(cfg.points):
            total += 1
            for _attempt in range(cfg.retry_limit):
                point = sampler.draw()
                if accept is not None and not accept(point):
                    continue
                values = dict(point)
                if fixed:
                    values.update(fixed)
                bindings = Bindings(values, functions)
                run = evaluator(bindings)
                try:
                    evaluated = [(c, c.evaluate(bindings, run)) for c in conditions]
                except (DomainError, NonFinite, ZeroDivisionError, OverflowError):
                    continue
                break
            else:
                singular += 1
                continue
            for cond, (value, scale) in evaluated:
                res = normalized(value, scale)
                entry = results[cond.name]
                entry.sample_count += 1
                if entry.witness is None or res > entry.max_normalized_residual:
                    entry.max_normalized_residual = res
                    entry.witness = _witness(point, functions, value)
                if res > cfg.tolerance and len(entry.failed_samples) < _MAX_RECORDED_FAILURES:
                    entry.failed_samples.append(_json_point(point))
    return ResidualReport(
        conditions=[results[c.name] for c in conditions],
        seed=cfg.seed,
        tolerance=cfg.tolerance,
        singular_samples=singular,
        total_samples=total,
    )


def _witness(point, functions, value) -> dict:
    from .expr import to_string

    w = {"point": _json_point(point), "value": [complex(value).real, complex(value).imag]}
    if functions:
        w["functions"] = {k: to_string(v) for k, v in sorted(functions.items())}
    return w
