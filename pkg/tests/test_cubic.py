import cmath

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rcodelin import cubic
from rcodelin.cubic import (
    COEFF_SYMBOLS,
    ODE_SYMBOLS,
    ComplexCubicODE,
    NotCubic,
    auxiliary_residuals,
    check_auxiliary,
    check_linearizable_complex,
    check_tresse,
    extract_cubic,
    lie_residuals_complex,
    total_derivative,
    tresse_invariants,
)
from rcodelin.expr import EvaluationError, eval_complex, parse, to_string
from rcodelin.sampling import FAIL, PASS, SamplingConfig

W_FAMILY = ("1 + t + t^2", "exp(t/4)", "1/(t + 3)")
LOG_SCALING = "p^2/u + w(x)*u"
CUBIC_DECAY = "-3*u*p - u^3"


def ode(text):
    return extract_cubic(parse(text, ODE_SYMBOLS))


class TestExtraction:
    def test_coefficients_of_cubic_decay(self):
        c = {k: to_string(v) for k, v in ode(CUBIC_DECAY).coefficients().items()}
        assert c == {"A": "0", "B": "0", "C": "-3*u", "D": "-u^3"}

    def test_coefficients_reassemble_the_rhs(self):
        w = parse("x*p^3 - u*p^2 + p/x + sin(u)", ODE_SYMBOLS)
        e = extract_cubic(w)
        pt = {"x": 0.7, "u": 0.2 + 0.4j, "p": -0.3 + 1.1j}
        assert eval_complex(e.rhs(), pt) == pytest.approx(eval_complex(w, pt))

    def test_non_cubic_rejected(self):
        with pytest.raises(NotCubic) as info:
            ode("exp(p)")
        assert info.value.max_residual > 0.1


class TestLieConditions:
    def test_negative_control_r2_is_2u(self):
        R1, R2 = lie_residuals_complex(ode("u*p"))
        for u in (0.3 + 0.1j, -1.2 + 0.8j):
            assert eval_complex(R1, {"x": 0.5, "u": u}) == 0
            assert eval_complex(R2, {"x": 0.5, "u": u}) == pytest.approx(2 * u)

    def test_negative_control_fails(self):
        r = check_linearizable_complex(ode("u*p"))
        assert r.verdict == FAIL
        assert r.max_residual >= 0.05

    @pytest.mark.parametrize("text", [CUBIC_DECAY, "-u", "1 + (p - x)^2*w(2*u - x^2)", "0", "p^3"])
    def test_linearizable_equations_pass(self, text):
        r = check_linearizable_complex(ode(text))
        assert r.verdict == PASS
        assert r.max_residual <= 1e-8

    def test_log_scaling_across_instantiations(self):
        r = check_linearizable_complex(ode(LOG_SCALING), SamplingConfig(ufunc_instantiations={"w": W_FAMILY}))
        assert r.verdict == PASS
        assert r.conditions[0].sample_count == 64 * 3

    def test_report_is_seeded(self):
        a = check_linearizable_complex(ode("u*p"), SamplingConfig(seed=7))
        b = check_linearizable_complex(ode("u*p"), SamplingConfig(seed=7))
        assert a.to_dict() == b.to_dict()
        assert a.seed == 7


coeff_text = st.sampled_from(["0", "1", "x", "u", "x*u", "u^2", "sin(u)", "exp(x*u)", "x^2 - u", "1/(u + 3)"])


@given(coeff_text, coeff_text, coeff_text, coeff_text, st.floats(0.2, 1.8), st.floats(-1, 1), st.floats(-1, 1))
def test_second_tresse_invariant_is_linear_in_p_with_lie_coefficients(A, B, C, D, x, ur, ui):
    # independent route: I2 of a cubic is 2*(R1*p + R2)
    e = ComplexCubicODE.parse(A, B, C, D)
    _, I2 = tresse_invariants(e.rhs())
    R1, R2 = lie_residuals_complex(e)
    base = {"x": x, "u": complex(ur, ui)}
    try:
        r1, r2 = eval_complex(R1, base), eval_complex(R2, base)
        vals = [eval_complex(I2, {**base, "p": p}) for p in (0, 1, 1j)]
    except EvaluationError:
        assume(False)
    scale = 1 + abs(r1) + abs(r2)
    for p, v in zip((0, 1, 1j), vals):
        assert abs(v - 2 * (r1 * p + r2)) <= 1e-9 * scale * 10


class TestTresse:
    def test_first_invariant_nonzero_for_exp_p(self):
        r = check_tresse(parse("exp(p)", ODE_SYMBOLS))
        c = r.condition("I1")
        assert c.failed_samples or c.max_normalized_residual > 0
        I1, _ = tresse_invariants(parse("exp(p)", ODE_SYMBOLS))
        for p in (0, 0.5, -1 + 1j):
            assert abs(eval_complex(I1, {"x": 1.0, "u": 0.5, "p": p})) > 0

    @pytest.mark.parametrize("text", [CUBIC_DECAY, "-u", LOG_SCALING])
    def test_invariants_vanish_on_linearizable(self, text):
        cfg = SamplingConfig(ufunc_instantiations={"w": W_FAMILY})
        assert check_tresse(parse(text, ODE_SYMBOLS), cfg).max_residual <= 1e-7

    def test_total_derivative(self):
        w = parse("-u", ODE_SYMBOLS)
        D = total_derivative(parse("x*u*p", ODE_SYMBOLS), w)
        pt = {"x": 0.5, "u": 2.0, "p": 3.0}
        # u p + x p^2 + x u w
        assert eval_complex(D, pt) == pytest.approx(6 + 4.5 - 2)


class TestAuxiliary:
    def test_closed_form_pair_for_log_scaling(self):
        cfg = SamplingConfig(ufunc_instantiations={"w": W_FAMILY})
        r = check_auxiliary(ode(LOG_SCALING), parse("0", COEFF_SYMBOLS), parse("-1/(x + 1)", COEFF_SYMBOLS), cfg)
        assert r.verdict == PASS
        assert [c.name for c in r.conditions] == ["aux1", "aux2", "aux3", "aux4"]

    def test_reading_of_w_selects_the_pair(self):
        k, K = parse("1/u", COEFF_SYMBOLS), parse("u", COEFF_SYMBOLS)
        assert check_auxiliary(ode(CUBIC_DECAY), k, K, interp=cubic.W_MEANS_K).verdict == PASS
        assert check_auxiliary(ode(CUBIC_DECAY), k, K, interp=cubic.W_MEANS_k).verdict == FAIL

    def test_residual_count(self):
        res = auxiliary_residuals(ode(CUBIC_DECAY), parse("0", COEFF_SYMBOLS), parse("0", COEFF_SYMBOLS))
        assert len(res) == 4


@given(coeff_text, coeff_text, coeff_text, coeff_text, st.floats(0.2, 1.8), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-2, 2))
def test_first_tresse_invariant_vanishes_on_cubics(A, B, C, D, x, ur, ui, p):
    I1, _ = tresse_invariants(ComplexCubicODE.parse(A, B, C, D).rhs())
    try:
        assert eval_complex(I1, {"x": x, "u": complex(ur, ui), "p": p}) == 0
    except EvaluationError:
        assume(False)


consts = st.builds(complex, st.integers(-5, 5), st.integers(-5, 5)).map(lambda c: f"({c.real} + {c.imag}*i)")


@given(consts, consts, consts, consts)
def test_constant_coefficients_have_zero_lie_residuals(A, B, C, D):
    R1, R2 = lie_residuals_complex(ComplexCubicODE.parse(A, B, C, D))
    pt = {"x": 0.8, "u": 0.3 - 0.6j}
    assert eval_complex(R1, pt) == 0 and eval_complex(R2, pt) == 0


@pytest.mark.parametrize("text", [CUBIC_DECAY, "u*p", "-u", "p^3 + x", "x*p^2 + u", "p^2/u + w(x)*u"])
def test_real_and_complex_verdicts_agree(text):
    from rcodelin.realify import check_linearizable_real

    cfg = SamplingConfig(ufunc_instantiations={"w": W_FAMILY})
    e = ode(text)
    assert check_linearizable_real(e, cfg).verdict == check_linearizable_complex(e, cfg).verdict
