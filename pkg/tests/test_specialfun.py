import math
from fractions import Fraction

import mpmath
import pytest
from flint import arb

from weilmaass.bigarith import make_context, to_float
from weilmaass.specialfun import (as_weight, erfc_big, holomorphic_w, truncation_M0,
                                  truncation_tail_log, upper_gamma, upper_gamma_halfint,
                                  w_kernel, w_kernel_bound)


def _rel_err(x: arb, ref) -> float:
    """|x - ref| / |ref| in high precision."""
    with make_context(80):
        r = arb(mpmath.nstr(ref, 75))
        return to_float(abs((x - r) / r))


@pytest.mark.parametrize("a", ["1/2", "3/2", "-1/2", "-3/2", "5/2", "1", "2"])
@pytest.mark.parametrize("x", ["1e-6", "0.3", "2.5", "17", "56.25", "300"])
def test_upper_gamma_against_series_oracle(a, x):
    # 60-digit oracle, 50-digit working context, rel. error <= 1e-45
    mpmath.mp.dps = 60
    ref = mpmath.gammainc(mpmath.mpf(Fraction(a).numerator) / Fraction(a).denominator,
                          mpmath.mpf(x), mpmath.inf)
    ctx = make_context(50)
    with ctx:
        val = upper_gamma(Fraction(a), arb(x))
    assert _rel_err(val, ref) <= 1e-45


def test_upper_gamma_halfint_zero_argument():
    ctx = make_context(30)
    with ctx:
        g = upper_gamma_halfint(Fraction(5, 2), 0)
    assert to_float(g) == pytest.approx(math.gamma(2.5), rel=1e-15)
    with pytest.raises(ValueError):
        upper_gamma_halfint(Fraction(-1, 2), 0)
    with pytest.raises(ValueError):
        upper_gamma_halfint(Fraction(1), 1)


def test_erfc_large_argument():
    mpmath.mp.dps = 60
    with make_context(50):
        v = erfc_big(arb(25))
    assert _rel_err(v, mpmath.erfc(25)) < 1e-45


@pytest.mark.parametrize("k", ["1/2", "-1/2", "-3/2"])
@pytest.mark.parametrize("v", ["-0.01", "-0.7", "-3", "0.25", "2"])
def test_w_kernel(k, v):
    mpmath.mp.dps = 50
    kf = Fraction(k)
    vm = mpmath.mpf(v)
    if vm > 0:
        ref = mpmath.exp(-2 * mpmath.pi * vm)
    else:
        ref = mpmath.exp(-2 * mpmath.pi * vm) * mpmath.gammainc(
            1 - mpmath.mpf(kf.numerator) / kf.denominator, -4 * mpmath.pi * vm, mpmath.inf)
    with make_context(40):
        w = w_kernel(kf, arb(v))
        bound = w_kernel_bound(kf, arb(v))
    assert _rel_err(w, ref) < 1e-38
    assert w <= bound


def test_w_kernel_rejects_zero():
    with pytest.raises(ValueError):
        w_kernel(Fraction(1, 2), 0)


def test_holomorphic_w():
    with make_context(30):
        assert to_float(holomorphic_w(arb(1))) == pytest.approx(math.exp(-2 * math.pi))


def test_as_weight():
    assert as_weight("-3/2") == Fraction(-3, 2)
    with pytest.raises(ValueError):
        as_weight("1/3")


def test_truncation_monotone():
    ms = [truncation_M0(11, Fraction(1, 2), 5, 0.5, e) for e in ("1e-10", "1e-20", "1e-30")]
    assert ms == sorted(ms) and ms[0] < ms[-1]
    assert truncation_M0(11, Fraction(1, 2), 5, 0.4, "1e-20") > ms[1]
    # the tail at the chosen point is below eps
    m = truncation_M0(11, Fraction(1, 2), 5, 0.5, "1e-20", safety=1.0)
    assert truncation_tail_log(11, Fraction(1, 2), 5, 0.5, m) <= math.log(1e-20)
    assert truncation_tail_log(11, Fraction(1, 2), 5, 0.5, m - 1) > math.log(1e-20)


def test_truncation_rejects_bad_height():
    with pytest.raises(ValueError):
        truncation_M0(11, Fraction(1, 2), 5, 0.9, "1e-10")


def test_truncation_calibration_points():
    # paper-reported truncation points, +-20%
    assert abs(truncation_M0(11, Fraction(1, 2), 5, 0.5, "1e-40") - 42) <= 0.2 * 42
    assert abs(truncation_M0(37, Fraction(1, 2), 3, 0.53, "1e-35") - 30) <= 0.2 * 30


def test_gamma_recurrence_random():
    import random
    rng = random.Random(11)
    ctx = make_context(30)
    with ctx:
        for _ in range(60):
            a = Fraction(rng.choice([1, 3, 5, 7]), 2)
            x = arb(repr(rng.uniform(1e-3, 50)))
            lhs = upper_gamma(a + 1, x) - arb(a.numerator) / a.denominator * upper_gamma(a, x) \
                - (x.log() * arb(a.numerator) / a.denominator - x).exp()
            assert to_float(abs(lhs)) <= 10.0 ** (-ctx.digits + 4) * to_float(upper_gamma(a + 1, x))


def test_w_kernel_below_bound_random():
    import random
    rng = random.Random(5)
    with make_context(25):
        for _ in range(1000):
            k = Fraction(rng.choice([1, -1, -3, -5]), 2)
            v = arb(repr(rng.choice([-1, 1]) * 10 ** rng.uniform(-3, 1.3)))
            assert w_kernel(k, v) <= w_kernel_bound(k, v)


def test_bound_decreases_in_abs_v():
    with make_context(25):
        for k in (Fraction(1, 2), Fraction(-3, 2)):
            prev = None
            for v in range(1, 12):
                b = w_kernel_bound(k, arb(-v))
                assert prev is None or b < prev
                prev = b
