"""Runge-Kutta integration of real systems and closed-form solution checks."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .cubic import COEFF_SYMBOLS, ODE_SYMBOLS, P, U, X
from .expr import Bindings, Expr, diff, evaluator, free_symbols, parse, split_terms, ufunc_names
from .realify import RealSystem
from .sampling import Box, FunctionCondition, ResidualReport, SamplingConfig, run_conditions

RK4_FIXED = "rk4_fixed"
RK4_STEP_DOUBLING = "rk4_step_doubling"
MIN_STEP = 1e-12
CSV_HEADER = ("x", "y", "z", "dy", "dz")


class SingularityEncountered(ArithmeticError):
    def __init__(self, x: float, message: str = "right-hand side is not finite"):
        super().__init__(f"{message} at x = {x!r}")
        self.x = x


class StepUnderflow(ArithmeticError):
    def __init__(self, x: float, h: float):
        super().__init__(f"step size {h:.3g} below {MIN_STEP:g} at x = {x!r}")
        self.x = x
        self.h = h


@dataclass
class Trajectory:
    x: np.ndarray
    states: np.ndarray  # columns y, z, dy, dz
    h: float
    method: str
    rejected_steps: int = 0
    accepted_steps: int = 0

    def __post_init__(self):
        if len(self.x) > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory contains non-finite states")

    @property
    def y(self):
        return self.states[:, 0]

    @property
    def z(self):
        return self.states[:, 1]

    def to_csv(self, target=None) -> str | None:
        """Write ``x,y,z,dy,dz`` rows with 17 significant digits.

        With no target the CSV text is returned.
        """
        buf = io.StringIO() if target is None else None
        handle = buf if buf is not None else (open(target, "w", newline="") if isinstance(target, str) else target)
        try:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for x, row in zip(self.x, self.states):
                writer.writerow([f"{v:.17g}" for v in (x, *row)])
        finally:
            if isinstance(target, str):
                handle.close()
        return buf.getvalue() if buf is not None else None


def _derivative_function(system, functions) -> Callable:
    """``f(x, state) -> dstate`` for a :class:`RealSystem` or a plain callable."""
    if callable(system) and not isinstance(system, RealSystem):
        return system
    if system.order == 2:

        def f(x, s):
            fy, fz = system.evaluate(x, s[0], s[1], s[2], s[3], functions)
            return np.array([s[2], s[3], fy, fz])

    else:

        def f(x, s):
            fy, fz = system.evaluate(x, s[0], s[1], functions=functions)
            return np.array([fy, fz])

    return f


def _safe(f, x, s):
    try:
        out = np.asarray(f(x, s), dtype=float)
    except (ArithmeticError, ValueError) as exc:
        raise SingularityEncountered(x, str(exc)) from None
    if not np.all(np.isfinite(out)):
        raise SingularityEncountered(x)
    return out


def _rk4_step(f, x, s, h):
    k1 = _safe(f, x, s)
    k2 = _safe(f, x + h / 2, s + h / 2 * k1)
    k3 = _safe(f, x + h / 2, s + h / 2 * k2)
    k4 = _safe(f, x + h, s + h * k3)
    return s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(system, initial, span, h: float = 1e-3, method: str = RK4_FIXED, tol: float = 1e-9,
              functions: Mapping | None = None) -> Trajectory:
    """Integrate from ``initial = (x0, y, z, dy, dz)`` up to ``span`` (end point or ``(x0, x1)``).

    First-order systems take ``(x0, y, z)``; their ``dy, dz`` columns hold the
    right-hand side along the solution.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    order = system.order if isinstance(system, RealSystem) else (2 if len(initial) == 5 else 1)
    x0 = float(initial[0])
    x1 = float(span[1] if isinstance(span, (tuple, list)) else span)
    if isinstance(span, (tuple, list)) and not math.isclose(float(span[0]), x0):
        raise ValueError("span must start at the initial x")
    if x1 <= x0:
        raise ValueError("span must extend to the right of x0")
    f = _derivative_function(system, functions or {})
    s = np.array([float(v) for v in initial[1:]])
    if order == 1 and len(s) != 2 or order == 2 and len(s) != 4:
        raise ValueError("initial state does not match the system order")
    _safe(f, x0, s)
    xs, rows = [x0], [s]
    rejected = accepted = 0
    x = x0
    if method == RK4_FIXED:
        n = max(1, int(round((x1 - x0) / h)))
        step = (x1 - x0) / n
        for k in range(1, n + 1):
            s = _rk4_step(f, x, s, step)
            x = x0 + k * step
            xs.append(x)
            rows.append(s)
        accepted = n
    elif method == RK4_STEP_DOUBLING:
        step = h
        while x < x1:
            last = step >= (x1 - x) - MIN_STEP * max(1.0, abs(x1))
            if last:
                step = x1 - x
            if step < MIN_STEP:
                raise StepUnderflow(x, step)
            full = _rk4_step(f, x, s, step)
            half = _rk4_step(f, x + step / 2, _rk4_step(f, x, s, step / 2), step / 2)
            err = float(np.max(np.abs(half - full))) / 15.0
            if err > tol:
                rejected += 1
                step /= 2
                continue
            x = x1 if last else x + step
            s = half + (half - full) / 15.0
            xs.append(x)
            rows.append(s)
            accepted += 1
            if err < tol / 64:
                step = min(2 * step, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    states = np.array(rows)
    if order == 1:
        d = np.array([_safe(f, xv, sv) for xv, sv in zip(xs, states)])
        states = np.hstack([states, d])
    return Trajectory(np.array(xs), states, h, method, rejected, accepted)


@dataclass
class ClosedFormSolution:
    """A solution ``u(x)`` (complex) or ``(y(x), z(x))`` with parameters.

    Parameters without a value in ``params`` are sampled per point, complex
    for ``u`` solutions and real for ``(y, z)`` ones, unless ``param_boxes``
    says otherwise.
    """

    u: Expr | None = None
    y: Expr | None = None
    z: Expr | None = None
    params: dict = field(default_factory=dict)
    param_boxes: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.u is None) == (self.y is None or self.z is None):
            raise ValueError("give either u or both y and z")

    @classmethod
    def parse(cls, u: str | None = None, y: str | None = None, z: str | None = None,
              parameters=(), params=None, param_boxes=None) -> "ClosedFormSolution":
        syms = {"x", *parameters}
        def p(s):
            return None if s is None else parse(s, syms)
        return cls(p(u), p(y), p(z), dict(params or {}), dict(param_boxes or {}))

    @property
    def is_complex(self) -> bool:
        return self.u is not None

    def expressions(self) -> tuple:
        return (self.u,) if self.is_complex else (self.y, self.z)

    def parameter_names(self) -> list:
        names = set()
        for e in self.expressions():
            names |= free_symbols(e)
        names.discard("x")
        return sorted(names)

    def ufunc_names(self) -> frozenset:
        return frozenset().union(*(ufunc_names(e) for e in self.expressions()))

    def derivatives(self) -> list:
        """``[(f, f', f''), ...]`` per component, by symbolic differentiation in ``x``."""
        out = []
        for e in self.expressions():
            d1 = diff(e, "x")
            out.append((e, d1, diff(d1, "x")))
        return out


def _sample_setup(sol: ClosedFormSolution, cfg: SamplingConfig):
    free = [n for n in sol.parameter_names() if n not in sol.params]
    boxes = dict(cfg.box)
    for n in free:
        if n in sol.param_boxes:
            boxes[n] = sol.param_boxes[n]
        elif n not in boxes and not sol.is_complex:
            boxes[n] = Box.real(-2.0, 2.0)
    fixed = {k: complex(v) for k, v in sol.params.items()}
    return cfg.with_overrides(box=boxes), ["x", *free], fixed


def verify_solution(equation, sol: ClosedFormSolution, cfg: SamplingConfig | None = None,
                    order: int = 2) -> ResidualReport:
    """Substitute a closed form into an ODE or a real system.

    ``equation`` is a complex right-hand side over ``(x, u, p)`` (``(x, u)``
    when ``order == 1``) or a :class:`RealSystem`. A complex ``u`` checked
    against a real system is split into ``y = Re u``, ``z = Im u``.
    """
    cfg = cfg or SamplingConfig()
    local, symbols, fixed = _sample_setup(sol, cfg)
    derivs = sol.derivatives()
    names = sol.ufunc_names()
    if isinstance(equation, RealSystem):
        names |= equation.ufunc_names()
        order = equation.order
        system = equation

        def evaluate(bindings, run):
            x = complex(bindings.values["x"]).real
            if sol.is_complex:
                u, du, ddu = (run(e) for e in derivs[0])
                comps = [(u.real, du.real, ddu.real), (u.imag, du.imag, ddu.imag)]
            else:
                comps = [tuple(run(e).real for e in d) for d in derivs]
            (y, dy, ddy), (z, dz, ddz) = comps
            if order == 2:
                fy, fz = system.evaluate(x, y, z, dy, dz, bindings.functions)
                lhs = (ddy, ddz)
            else:
                fy, fz = system.evaluate(x, y, z, functions=bindings.functions)
                lhs = (dy, dz)
            dev = max(abs(lhs[0] - fy), abs(lhs[1] - fz))
            return complex(dev), abs(lhs[0]) + abs(lhs[1]) + abs(fy) + abs(fz)

    else:
        if not sol.is_complex:
            raise ValueError("a complex equation needs a complex solution u(x)")
        names |= ufunc_names(equation)
        terms = split_terms(equation)

        def evaluate(bindings, run):
            u, du, ddu = (run(e) for e in derivs[0])
            values = {X: bindings.values["x"], U: u}
            if order == 2:
                values[P] = du
            inner = evaluator(Bindings(values, bindings.functions))
            rhs = [inner(t) for t in terms]
            lhs = ddu if order == 2 else du
            return lhs - sum(rhs, 0j), abs(lhs) + sum(abs(v) for v in rhs)

    return run_conditions([FunctionCondition("solution", evaluate)], local, symbols, names, fixed=fixed)


def closed_form_values(sol: ClosedFormSolution, xs, functions=None) -> np.ndarray:
    """Rows ``(y, z, dy, dz)`` of a solution with all parameters fixed."""
    derivs = sol.derivatives()
    rows = []
    for x in xs:
        values = {"x": float(x), **{k: complex(v) for k, v in sol.params.items()}}
        run = evaluator(Bindings(values, functions or {}))
        if sol.is_complex:
            u, du, _ = (run(e) for e in derivs[0])
            rows.append((u.real, u.imag, du.real, du.imag))
        else:
            (y, dy, _), (z, dz, _) = [tuple(run(e).real for e in d) for d in derivs]
            rows.append((y, z, dy, dz))
    return np.array(rows)


def track_closed_form(system: RealSystem, sol: ClosedFormSolution, span: tuple, h: float = 1e-3,
                      method: str = RK4_FIXED, tol: float = 1e-9, functions=None) -> dict:
    """Integrate from the closed form's initial data and report the largest deviation."""
    x0, x1 = span
    start = closed_form_values(sol, [x0], functions)[0]
    if system.order == 1:
        start = start[:2]
    traj = integrate(system, (x0, *start), (x0, x1), h=h, method=method, tol=tol, functions=functions)
    exact = closed_form_values(sol, traj.x, functions)
    err = np.abs(traj.states[:, :2] - exact[:, :2])
    return {"max_abs_error": float(err.max()), "trajectory": traj}
