from fractions import Fraction

import pytest

from rcodelin.cubic import COEFF_SYMBOLS, ODE_SYMBOLS
from rcodelin.expr import Bindings, Const, eval_complex, evaluator, parse
from rcodelin.realify import RealSystem
from rcodelin.sampling import FAIL, PASS, Box, SamplingConfig
from rcodelin.transform import (
    FIRST_ORDER_TARGET_SYMBOLS,
    TARGET_SYMBOLS,
    AnalyticContinuationUnsupported,
    InvalidConstant,
    PointMap2,
    PointMap3,
    canonical_coefficients,
    canonical_real_audit,
    canonical_rhs,
    check_inverse,
    match_canonical_cubic,
    match_canonical_real,
    pushforward_check,
    realify_map,
    verify_real_transformation,
    verify_transformation,
)

W_CFG = SamplingConfig(ufunc_instantiations={"w": ("1 + t + t^2", "exp(t/4)", "1/(t + 3)")})
OSC = SamplingConfig(box={"x": Box.real(0.1, 1.4)})
CUBIC_DECAY = "-3*u*p - u^3"
CANONICAL_TARGET = "(-dU^3 + 6*dU^2 - 11*dU + 6)/chi"


def src(text, order=2):
    return parse(text, ODE_SYMBOLS if order == 2 else COEFF_SYMBOLS)


def tgt(text, order=2):
    return parse(text, TARGET_SYMBOLS if order == 2 else FIRST_ORDER_TARGET_SYMBOLS)


MAPS = [
    ("-u^2", "0", "x", "1/u - x", 1, SamplingConfig()),
    ("-u", "0", "tan(x)", "u*sec(x)", 2, OSC),
    ("p^2/u + w(x)*u", "w(1/chi)/chi^3", "1/x", "log(u)/x", 2, W_CFG),
    (CUBIC_DECAY, CANONICAL_TARGET, "1/u", "x + 1/u", 2, SamplingConfig()),
    (CUBIC_DECAY, "0", "x - 1/u", "x^2/2 - x/u", 2, SamplingConfig()),
    ("1 + (p - x)^2*w(2*u - x^2)", "-dU*w(chi)/2", "2*u - x^2", "x", 2, W_CFG),
]


@pytest.mark.parametrize("source, target, chi, U, order, cfg", MAPS)
def test_linearizing_maps(source, target, chi, U, order, cfg):
    r = verify_transformation(src(source, order), tgt(target, order), PointMap2.parse(chi, U), cfg, order)
    assert r.verdict == PASS and r.max_residual <= 1e-8


def test_identity_map_fails_on_cubic_decay():
    assert verify_transformation(src(CUBIC_DECAY), tgt("0"), PointMap2.identity()).verdict == FAIL


def test_pushforward_agrees_with_finite_differences_along_a_solution():
    # independent route: push u(x) = 2(x - a)/(x^2 - 2 a x - 2 b) through chi = 1/u, U = x + 1/u
    # and differentiate U(chi) numerically
    a, b = 0.3 + 0.2j, -0.7 + 0.1j

    def u(x):
        return 2 * (x - a) / (x * x - 2 * a * x - 2 * b)

    def chi(x):
        return 1 / u(x)

    def U(x):
        return x + 1 / u(x)

    h = 1e-4
    target = tgt(CANONICAL_TARGET)
    for x in (0.4, 0.9, 1.6):
        dchi = (chi(x + h) - chi(x - h)) / (2 * h)
        dU = (U(x + h) - U(x - h)) / (2 * h) / dchi

        def slope(s):
            return ((U(s + h) - U(s - h)) / (chi(s + h) - chi(s - h)))

        ddU = (slope(x + h) - slope(x - h)) / (2 * h) / dchi
        want = eval_complex(target, {"chi": chi(x), "U": U(x), "dU": dU})
        assert abs(ddU - want) <= 1e-5 * (1 + abs(want))


def test_pointwise_check():
    m = PointMap2.parse("tan(x)", "u*sec(x)")
    assert pushforward_check(src("-u"), tgt("0"), m, (0.5, 1 + 1j, 0.3)) <= 1e-12


def test_inverse_round_trip():
    m = PointMap2.parse("tan(x)", "u*sec(x)", ("atan(chi)", "U*cos(atan(chi))"))
    assert check_inverse(m, OSC).verdict == PASS
    bad = PointMap2.parse("tan(x)", "u*sec(x)", ("atan(chi)", "U"))
    assert check_inverse(bad, OSC).verdict == FAIL


def test_composition():
    first = PointMap2.parse("1/u", "x + 1/u")
    after = PointMap2.parse("2*x", "u - x")
    c = first.compose(after)
    pt = {"x": 0.7, "u": 0.4 + 0.3j}
    assert eval_complex(c.chi, pt) == pytest.approx(2 / pt["u"])
    assert eval_complex(c.U, pt) == pytest.approx(pt["x"])


class TestCanonical:
    def test_exact_coefficients(self):
        c = canonical_coefficients(-1, 6)
        assert [c[k] for k in ("cubic", "quadratic", "linear", "constant")] == [
            Const(-1), Const(6), Const(-11), Const(6)
        ]

    def test_rational_and_complex_constants_stay_exact(self):
        c = canonical_coefficients(3, "1/2")
        assert c["linear"] == Const(Fraction(37, 36))
        assert c["constant"] == Const(Fraction(1, 18) + Fraction(1, 1944))
        z = canonical_coefficients("i", 0)
        assert z["linear"] == Const(1) and z["constant"] == Const(0)

    def test_zero_cubic_rejected(self):
        with pytest.raises(InvalidConstant):
            canonical_coefficients(0, 6)
        with pytest.raises(InvalidConstant):
            canonical_coefficients("x", 1)

    def test_match(self):
        r = match_canonical_cubic(tgt(CANONICAL_TARGET), -1, 6)
        assert r.verdict == PASS
        assert any("-1, 6, -11, 6" in n for n in r.notes)
        assert match_canonical_cubic(tgt(CANONICAL_TARGET), -1, 5).verdict == FAIL

    def test_rhs_builder(self):
        e = canonical_rhs(-1, 6)
        assert eval_complex(e, {"chi": 2, "dU": 1}) == pytest.approx(0)

    def test_real_split_of_canonical(self):
        system = RealSystem.parse(
            "(-(dy^3 - 3*dy*dz^2) + 6*(dy^2 - dz^2) - 11*dy + 6)/x",
            "(-(3*dy^2*dz - dz^3) + 12*dy*dz - 11*dz)/x",
        )
        assert match_canonical_real(system, -1, 0, 6, 0).verdict == PASS

    def test_transcribed_real_form_only_agrees_on_the_unit_circle(self):
        assert canonical_real_audit(-1, 0, 6, 0)["agrees"]
        assert canonical_real_audit(0.6, 0.8, 1, 2)["agrees"]
        assert not canonical_real_audit(2, 0, 6, 0)["agrees"]


class TestRealMaps:
    def test_split_map_components(self):
        m3 = realify_map(PointMap2.parse("tan(x)", "u*sec(x)"), OSC)
        assert not m3.analytic_continuation
        from rcodelin.realify import RealPoint

        pt = RealPoint(0.5, 0.3, -0.2)
        direct = PointMap3.parse("tan(x)", "y*sec(x)", "z*sec(x)")
        assert m3.values(pt) == pytest.approx(direct.values(pt))

    def test_analytic_continuation_flag(self):
        m3 = realify_map(PointMap2.parse("x - 1/u", "x^2/2 - x/u"))
        assert m3.analytic_continuation and m3.max_imag_chi > 0.1
        with pytest.raises(AnalyticContinuationUnsupported):
            verify_real_transformation(RealSystem.from_complex(src(CUBIC_DECAY)), ("0", "0"), m3)

    def test_real_oscillator_map(self):
        m3 = PointMap3.parse("tan(x)", "y*sec(x)", "z*sec(x)")
        r = verify_real_transformation(RealSystem.parse("-y", "-z"), ("0", "0"), m3, OSC)
        assert r.verdict == PASS

    def test_real_riccati_map(self):
        m3 = PointMap3.parse("x", "y/(y^2 + z^2) - x", "-z/(y^2 + z^2)")
        r = verify_real_transformation(RealSystem.parse("-y^2 + z^2", "-2*y*z", order=1), ("0", "0"), m3)
        assert r.verdict == PASS

    def test_log_map_needs_cubic_chi(self):
        system = RealSystem.from_complex(src("p^2/u + w(x)*u"))
        m3 = PointMap3.parse("1/x", "log(y^2 + z^2)/(2*x)", "atan2(z, y)/x")
        cfg = SamplingConfig(ufunc_instantiations={"w": ("1 + t",)})
        # w real on real chi here, so the imaginary target is 0
        assert verify_real_transformation(system, ("w(1/chi)/chi^3", "0"), m3, cfg).verdict == PASS
        assert verify_real_transformation(system, ("w(1/chi)/chi", "0"), m3, cfg).verdict == FAIL


def test_identity_map_passes_when_source_equals_target():
    assert verify_transformation(src("-u + x*p"), tgt("-U + chi*dU"), PointMap2.identity()).verdict == PASS


def test_composition_carries_the_source_to_the_final_target():
    # -u -> U'' = 0 via the oscillator map, then an affine map keeps U'' = 0
    first = PointMap2.parse("tan(x)", "u*sec(x)")
    second = PointMap2.parse("2*x + 1", "u - 3*x")
    assert verify_transformation(src("-u"), tgt("0"), first.compose(second), OSC).max_residual <= 1e-7


@pytest.mark.parametrize(
    "source, target, real_target, chi, U, order, cfg",
    [
        ("-u", "0", ("0", "0"), "tan(x)", "u*sec(x)", 2, OSC),
        ("-u^2", "0", ("0", "0"), "x", "1/u - x", 1, SamplingConfig()),
        ("-u", "0", ("0", "0"), "x", "u", 2, OSC),
        ("p^2/u + w(x)*u", "w(1/chi)/chi^3", ("w(1/chi)/chi^3", "0"), "1/x", "log(u)/x", 2,
         SamplingConfig(ufunc_instantiations={"w": ("1 + t",)})),
    ],
)
def test_real_split_agrees_with_the_complex_parent(source, target, real_target, chi, U, order, cfg):
    m = PointMap2.parse(chi, U)
    complex_verdict = verify_transformation(src(source, order), tgt(target, order), m, cfg, order).verdict
    system = RealSystem.from_complex(src(source, order), order)
    real_verdict = verify_real_transformation(system, real_target, realify_map(m, cfg), cfg).verdict
    assert real_verdict == complex_verdict


@pytest.mark.parametrize("a, b", [(1, 0), (-1, 6), (2, 1), (0.5, -3), (-3, 2)])
def test_real_canonical_split_reduces_to_real_constants(a, b):
    from rcodelin.transform import canonical_real_rhs

    split = canonical_real_rhs(a, 0, b, 0)
    c = canonical_coefficients(a, b)
    for q in (0.3 - 0.2j, -1.1 + 0.5j, 2.0):
        want = sum(c[k].value * q**n for k, n in (("cubic", 3), ("quadratic", 2), ("linear", 1), ("constant", 0)))
        got = complex(*split(q.real, q.imag))
        assert abs(got - want) <= 1e-9 * (1 + abs(want))
