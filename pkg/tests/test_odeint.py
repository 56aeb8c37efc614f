import csv
import io
import math

import numpy as np
import pytest

from rcodelin.cubic import COEFF_SYMBOLS, ODE_SYMBOLS
from rcodelin.expr import parse
from rcodelin.odeint import (
    RK4_FIXED,
    RK4_STEP_DOUBLING,
    ClosedFormSolution,
    SingularityEncountered,
    StepUnderflow,
    Trajectory,
    closed_form_values,
    integrate,
    track_closed_form,
    verify_solution,
)
from rcodelin.realify import RealSystem
from rcodelin.sampling import FAIL, PASS, SamplingConfig

OSCILLATOR = RealSystem.parse("-y", "-z")
CUBIC_DECAY = "-3*u*p - u^3"
HALF = SamplingConfig(points=32)


def oscillator_error(h):
    traj = integrate(OSCILLATOR, (0.0, 1.0, 0.5, 0.0, 1.0), (0.0, 2.0), h=h)
    x = traj.x
    exact = np.column_stack([np.cos(x), 0.5 * np.cos(x) + np.sin(x)])
    return float(np.max(np.abs(traj.states[:, :2] - exact)))


class TestIntegrator:
    def test_fourth_order_convergence(self):
        ratio = oscillator_error(1e-2) / oscillator_error(5e-3)
        assert 12 <= ratio <= 20

    def test_grid_and_counts(self):
        traj = integrate(OSCILLATOR, (0.0, 1.0, 0.0, 0.0, 0.0), 1.0, h=0.1)
        assert len(traj.x) == 11 and traj.accepted_steps == 10
        assert traj.x[-1] == 1.0

    def test_step_doubling_meets_tolerance(self):
        traj = integrate(OSCILLATOR, (0.0, 1.0, 0.0, 0.0, 1.0), (0.0, 2.0), h=0.2,
                         method=RK4_STEP_DOUBLING, tol=1e-10)
        assert traj.x[-1] == 2.0
        assert abs(traj.y[-1] - math.cos(2.0)) < 1e-8
        assert abs(traj.z[-1] - math.sin(2.0)) < 1e-8
        assert traj.rejected_steps > 0

    def test_first_order_fills_derivative_columns(self):
        riccati = RealSystem.parse("-y^2 + z^2", "-2*y*z", order=1)
        traj = integrate(riccati, (0.0, 1.0, 0.0), (0.0, 1.0), h=1e-2)
        assert traj.states.shape[1] == 4
        assert traj.y[-1] == pytest.approx(0.5, abs=1e-9)
        assert traj.states[-1, 2] == pytest.approx(-0.25, abs=1e-9)

    def test_singularity(self):
        blowup = RealSystem.parse("y^2", "0", order=1)
        with pytest.raises(SingularityEncountered) as info:
            integrate(blowup, (0.0, 1.0, 0.0), (0.0, 2.0), h=1e-2)
        assert 0.9 < info.value.x < 1.1

    def test_underflow(self):
        stiff = RealSystem.parse("-1e12*y", "0", order=1)
        with pytest.raises((StepUnderflow, SingularityEncountered)):
            integrate(stiff, (0.0, 1.0, 0.0), (0.0, 1.0), h=0.1, method=RK4_STEP_DOUBLING, tol=1e-12)

    @pytest.mark.parametrize("kwargs", [dict(h=0), dict(method="euler"), dict(span=(1.0, 2.0)), dict(span=-1.0)])
    def test_argument_validation(self, kwargs):
        args = dict(h=0.1, span=(0.0, 1.0))
        args.update(kwargs)
        with pytest.raises(ValueError):
            integrate(OSCILLATOR, (0.0, 1.0, 0.0, 0.0, 0.0), **args)

    def test_callable_system(self):
        traj = integrate(lambda x, s: np.array([s[1], -s[0]]), (0.0, 0.0, 1.0), (0.0, 1.0), h=1e-3)
        assert traj.y[-1] == pytest.approx(math.sin(1.0), abs=1e-10)


class TestCsv:
    def test_header_and_precision(self):
        traj = integrate(OSCILLATOR, (0.0, 1.0, 0.0, 0.0, 1.0), 0.3, h=0.1)
        text = traj.to_csv()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["x", "y", "z", "dy", "dz"]
        assert len(rows) == 5
        assert float(rows[-1][1]) == traj.y[-1]

    def test_file_target(self, tmp_path):
        traj = integrate(OSCILLATOR, (0.0, 1.0, 0.0, 0.0, 1.0), 0.3, h=0.1)
        path = tmp_path / "t.csv"
        assert traj.to_csv(str(path)) is None
        assert path.read_text() == traj.to_csv()

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.0]), np.zeros((2, 4)), 0.1, RK4_FIXED)
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 1.0]), np.array([[0, 0, 0, 0], [np.nan, 0, 0, 0]]), 0.1, RK4_FIXED)


CUBIC_DECAY_REAL = ClosedFormSolution.parse(
    y="(2*(x - a1)*(x^2 - 2*a1*x - 2*b1) + 4*a2*(a2*x + b2))/((x^2 - 2*a1*x - 2*b1)^2 + (2*a2*x + 2*b2)^2)",
    z="(4*(x - a1)*(a2*x + b2) - 2*a2*(x^2 - 2*a1*x - 2*b1))/((x^2 - 2*a1*x - 2*b1)^2 + (2*a2*x + 2*b2)^2)",
    parameters=["a1", "a2", "b1", "b2"],
)


class TestSolutions:
    def test_oscillator_complex(self):
        sol = ClosedFormSolution.parse(u="alpha*cos(x) + beta*sin(x)", parameters=["alpha", "beta"])
        r = verify_solution(parse("-u", ODE_SYMBOLS), sol, HALF)
        assert r.verdict == PASS and r.conditions[0].sample_count == 32

    def test_oscillator_real(self):
        sol = ClosedFormSolution.parse(y="a1*cos(x) + b1*sin(x)", z="a2*cos(x) + b2*sin(x)",
                                       parameters=["a1", "a2", "b1", "b2"])
        assert verify_solution(OSCILLATOR, sol, HALF).verdict == PASS

    def test_cubic_decay_complex_and_real(self):
        sol = ClosedFormSolution.parse(u="2*(x - alpha)/(x^2 - 2*alpha*x - 2*beta)", parameters=["alpha", "beta"])
        assert verify_solution(parse(CUBIC_DECAY, ODE_SYMBOLS), sol, HALF).verdict == PASS
        system = RealSystem.from_complex(parse(CUBIC_DECAY, ODE_SYMBOLS))
        assert verify_solution(system, CUBIC_DECAY_REAL, HALF).verdict == PASS
        # complex u checked against the split system
        assert verify_solution(system, sol, HALF).verdict == PASS

    def test_wrong_solution_fails(self):
        sol = ClosedFormSolution.parse(u="3*(x - alpha)/(x^2 - 2*alpha*x - 2*beta)", parameters=["alpha", "beta"])
        assert verify_solution(parse(CUBIC_DECAY, ODE_SYMBOLS), sol, HALF).max_residual > 1e-3

    def test_first_order(self):
        sol = ClosedFormSolution.parse(u="1/(x + c)", parameters=["c"])
        assert verify_solution(parse("-u^2", COEFF_SYMBOLS), sol, HALF, order=1).verdict == PASS

    def test_fixed_parameters(self):
        sol = ClosedFormSolution.parse(u="alpha*cos(x)", parameters=["alpha"], params={"alpha": 2})
        assert sol.parameter_names() == ["alpha"]
        vals = closed_form_values(sol, [0.0, math.pi / 2])
        assert vals[0] == pytest.approx([2, 0, 0, 0])
        assert vals[1] == pytest.approx([0, 0, -2, 0], abs=1e-12)

    def test_needs_exactly_one_form(self):
        with pytest.raises(ValueError):
            ClosedFormSolution.parse(u="x", y="x", z="0")
        with pytest.raises(ValueError):
            ClosedFormSolution.parse(y="x")

    def test_tracking(self):
        sol = ClosedFormSolution(CUBIC_DECAY_REAL.u, CUBIC_DECAY_REAL.y, CUBIC_DECAY_REAL.z,
                                 {"a1": 0, "a2": 1, "b1": 0, "b2": 0})
        system = RealSystem.from_complex(parse(CUBIC_DECAY, ODE_SYMBOLS))
        out = track_closed_form(system, sol, (0.5, 2.5))
        assert out["max_abs_error"] <= 1e-5
