import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parab.errors import DomainError, FormatError
from parab.interval import (
    CInterval, Interval, LN2, PI, TWO_PI, iv_arith, iv_convolve, iv_cos, iv_exp,
    iv_from_decimal, iv_matmul, iv_sin, up_matmul,
)

mpmath.mp.prec = 200


def ulp(x):
    return np.spacing(abs(x))


def encloses(iv, exact):
    lo, hi = float(iv.lo), float(iv.hi)
    return mpmath.mpf(lo) <= exact <= mpmath.mpf(hi)


def test_exact_addition():
    s = Interval(1.0, 2.0) + Interval(3.0, 4.0)
    assert float(s.lo) == 4.0 and float(s.hi) == 6.0


def test_zero_annihilates():
    p = Interval(0.0) * Interval(-3.5, 7.25)
    assert float(p.lo) == 0.0 and float(p.hi) == 0.0


def test_one_third_is_tight():
    q = Interval(1.0) / Interval(3.0)
    assert q.contains(Fraction(1, 3))
    assert float(q.hi) - float(q.lo) <= 2 * ulp(1 / 3)


def test_division_by_zero_interval():
    with pytest.raises(DomainError):
        Interval(1.0) / Interval(-1.0, 1.0)


def test_iv_arith_dispatch():
    assert iv_arith("sub", Interval(5.0), Interval(2.0)).contains(3.0)
    with pytest.raises(ValueError):
        iv_arith("pow", Interval(1.0), Interval(1.0))


def test_exp_of_zero():
    e = iv_exp(Interval(0.0))
    assert e.contains(1.0)
    assert float(e.hi) - float(e.lo) <= 2 * ulp(1.0)


def test_exp_of_one_against_oracle():
    e = iv_exp(Interval(1.0))
    assert encloses(e, mpmath.e)
    assert float(e.hi) - float(e.lo) < 1e-14


def test_exp_underflow_and_overflow():
    e = iv_exp(Interval(-1e300, -700.0))
    assert float(e.lo) == 0.0 and 0.0 < float(e.hi) < 1e-300
    big = iv_exp(Interval(1.0, 800.0))
    assert big.overflow and np.isinf(big.hi)
    assert not iv_exp(Interval(1.0)).overflow


def test_exp_grid_against_oracle():
    xs = np.linspace(-740.0, 705.0, 997)
    e = iv_exp(Interval(xs))
    for x, lo, hi in zip(xs, e.lo, e.hi):
        exact = mpmath.exp(mpmath.mpf(float(x)))
        assert mpmath.mpf(float(lo)) <= exact <= mpmath.mpf(float(hi))


def test_constants_bracket_oracle():
    assert encloses(LN2, mpmath.log(2))
    assert encloses(PI, mpmath.pi)
    assert encloses(TWO_PI, 2 * mpmath.pi)


def test_trig_against_oracle():
    xs = np.linspace(-50.0, 50.0, 401)
    c = iv_cos(Interval(xs))
    s = iv_sin(Interval(xs))
    for i, x in enumerate(xs):
        xm = mpmath.mpf(float(x))
        assert encloses(c[i], mpmath.cos(xm))
        assert encloses(s[i], mpmath.sin(xm))
    assert np.max(c.width()) < 1e-13


def test_trig_wide_argument():
    c = iv_cos(Interval(0.0, 10.0))
    assert float(c.lo) == -1.0 and float(c.hi) == 1.0


def test_decimal_parsing():
    half = iv_from_decimal("0.5")
    assert float(half.lo) == float(half.hi) == 0.5
    tenth = iv_from_decimal("0.1")
    assert float(tenth.lo) < float(tenth.hi)
    assert tenth.contains(Fraction(1, 10))
    alpha = iv_from_decimal("0.127")
    assert alpha.contains(Fraction(127, 1000))
    assert iv_from_decimal("-2.5e-3").contains(Fraction(-25, 10000))
    for bad in ["", "abc", "1..2", "nan", "inf", "1e", None]:
        with pytest.raises(FormatError):
            iv_from_decimal(bad)


def _random_rational(rng):
    num = rng.randint(-10 ** 6, 10 ** 6)
    den = rng.randint(1, 10 ** 4)
    return Fraction(num, den)


def test_containment_probes():
    """Exact rational results lie inside the computed enclosures."""
    rng = random.Random(1234)
    n = 100_000
    xs = [_random_rational(rng) for _ in range(n)]
    ys = [_random_rational(rng) for _ in range(n)]
    ys = [y if y != 0 else Fraction(1) for y in ys]
    xiv = Interval(np.array([float(Interval.from_fraction(x).lo) for x in xs]),
                   np.array([float(Interval.from_fraction(x).hi) for x in xs]))
    yiv = Interval(np.array([float(Interval.from_fraction(y).lo) for y in ys]),
                   np.array([float(Interval.from_fraction(y).hi) for y in ys]))
    ops = {
        "add": (lambda a, b: a + b, xiv + yiv),
        "sub": (lambda a, b: a - b, xiv - yiv),
        "mul": (lambda a, b: a * b, xiv * yiv),
        "div": (lambda a, b: a / b, xiv / yiv),
    }
    for name, (f, res) in ops.items():
        lo = res.lo
        hi = res.hi
        for i in range(0, n, 7):
            exact = f(xs[i], ys[i])
            assert Fraction(float(lo[i])) <= exact <= Fraction(float(hi[i])), (name, i)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(0, 10), st.floats(-1e6, 1e6), st.floats(0, 10),
       st.floats(0, 1), st.floats(0, 1))
def test_containment_property(a, wa, b, wb, s, t):
    x = Interval(a, a + wa)
    y = Interval(b, b + wb)
    px = Fraction(a) + Fraction(s) * (Fraction(a + wa) - Fraction(a))
    py = Fraction(b) + Fraction(t) * (Fraction(b + wb) - Fraction(b))
    for res, exact in ((x + y, px + py), (x - y, px - py), (x * y, px * py)):
        assert Fraction(float(res.lo)) <= exact <= Fraction(float(res.hi))
    if not y.contains_zero():
        q = x / y
        exact = px / py
        assert np.isinf(q.lo) or Fraction(float(q.lo)) <= exact
        assert np.isinf(q.hi) or exact <= Fraction(float(q.hi))


def test_outward_width():
    x = Interval(1.0, 1.5)
    y = Interval(2.0, 3.0)
    p = x * y
    assert float(p.lo) <= 2.0 and float(p.hi) >= 4.5


def test_complex_product_and_modulus():
    z = CInterval(Interval(1.0), Interval(2.0))
    w = CInterval(Interval(3.0), Interval(-1.0))
    p = z * w
    assert p.contains(complex(1, 2) * complex(3, -1))
    assert z.abs().contains(np.sqrt(5.0))
    assert z.mag() >= np.sqrt(5.0)
    q = z / w
    assert q.contains(complex(1, 2) / complex(3, -1))


def test_complex_exp():
    z = CInterval(Interval(0.3), Interval(2.0))
    e = z.exp()
    exact = mpmath.exp(mpmath.mpc(0.3, 2.0))
    assert encloses(e.re, exact.real) and encloses(e.im, exact.imag)


def test_matmul_and_convolve_enclose():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    b = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    prod = iv_matmul(CInterval.point(a), CInterval.point(b))
    exact = [[sum(mpmath.mpc(a[i, k]) * mpmath.mpc(b[k, j]) for k in range(5))
              for j in range(4)] for i in range(6)]
    for i in range(6):
        for j in range(4):
            assert encloses(prod.re[i, j], exact[i][j].real)
            assert encloses(prod.im[i, j], exact[i][j].imag)
    u = rng.standard_normal(9)
    v = rng.standard_normal(7)
    conv = iv_convolve(Interval(u), Interval(v))
    for n in range(15):
        ex = sum(mpmath.mpf(u[m]) * mpmath.mpf(v[n - m]) for m in range(9) if 0 <= n - m < 7)
        assert encloses(conv[n], ex)


def test_upper_matmul_dominates():
    rng = np.random.default_rng(1)
    a = rng.random((8, 8))
    b = rng.random((8, 3))
    ub = up_matmul(a, b)
    for i in range(8):
        for j in range(3):
            ex = sum(mpmath.mpf(a[i, k]) * mpmath.mpf(b[k, j]) for k in range(8))
            assert mpmath.mpf(float(ub[i, j])) >= ex


def test_interval_powers():
    x = Interval(-2.0, 3.0)
    assert (x ** 2).contains(0.0) and float((x ** 2).hi) >= 9.0
    assert (x ** 3).contains(-8.0) and (x ** 3).contains(27.0)
    assert float(x.sqr().lo) == 0.0
