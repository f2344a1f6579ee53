import mpmath
import numpy as np
import pytest

from parab.chebyshev import (
    ChebPoly, InterpErrorModel, STSeq, c0_bound, cheb_derivative, cheb_eval, cheb_interpolate,
    cheb_nodes, cheb_to_monomial, interp_error_bound, nodes_in_domain, phi_functions,
    st_multiply, time_average,
)
from parab.errors import UsageError
from parab.interval import CInterval, Interval, iv_exp

mpmath.mp.prec = 120


def poly(domain, coeffs):
    return ChebPoly(domain, CInterval.point(np.asarray(coeffs, dtype=complex)))


def test_eval_examples():
    c = poly((0.0, 2.0), [3.5])
    assert cheb_eval(c, Interval(1.3)).contains(3.5)
    assert cheb_eval(poly((-1, 1), [0, 1]), Interval(0.5)).contains(0.5)
    assert cheb_eval(poly((-1, 1), [0, 0, 1]), Interval(0.5)).contains(-0.5)
    with pytest.raises(UsageError):
        cheb_eval(c, Interval(2.5))


def test_eval_matches_numpy_on_shifted_domain():
    rng = np.random.default_rng(0)
    coeffs = rng.standard_normal(9)
    p = poly((0.25, 1.75), coeffs)
    for t in np.linspace(0.25, 1.75, 17):
        ref = np.polynomial.chebyshev.chebval((2 * t - 2.0) / 1.5, coeffs)
        assert abs(cheb_eval(p, Interval(t)).mid() - ref) < 1e-12


def test_c0_bound_examples():
    assert c0_bound(poly((0, 1), [-2.0])).contains(2.0)
    assert c0_bound(poly((0, 1), [1.0, 1.0])).contains(2.0)
    assert c0_bound(poly((0, 1), [0.0, 0.0, 1.0])).contains(1.0)


def test_interpolation_reproduces_polynomials():
    rng = np.random.default_rng(1)
    K = 12
    for deg in (0, 3, 12):
        coeffs = np.zeros(K + 1)
        coeffs[:deg + 1] = rng.standard_normal(deg + 1)
        s = cheb_nodes(K).mid()
        vals = np.polynomial.chebyshev.chebval(s, coeffs)
        # the nodes are irrational; enclose the values through the interval nodes
        p0 = poly((-1, 1), coeffs)
        samples = [cheb_eval(p0, cheb_nodes(K)[j]) for j in range(K + 1)]
        samples = CInterval(Interval(np.array([float(x.re.lo) for x in samples]),
                                     np.array([float(x.re.hi) for x in samples])))
        p = cheb_interpolate(samples, (-1, 1))
        for k in range(K + 1):
            assert p.coeffs[k].contains(coeffs[k])
        assert np.allclose(vals, samples.mid().real)


def test_interpolation_of_constant_and_exponential():
    K = 10
    const = cheb_interpolate(CInterval(Interval(np.full(K + 1, 2.5))), (0.0, 3.0))
    assert const.coeffs[0].contains(2.5)
    for k in range(1, K + 1):
        assert const.coeffs[k].contains(0.0)
    e = cheb_interpolate(CInterval(iv_exp(cheb_nodes(K))), (-1.0, 1.0))
    assert e.coeffs[0].contains(complex(mpmath.besseli(0, 1)))
    assert e.coeffs[1].contains(complex(2 * mpmath.besseli(1, 1)))


def test_eval_at_nodes_reproduces_samples():
    K = 9
    dom = (1.0, 1.5)
    t = nodes_in_domain(dom, K)
    samples = CInterval(iv_exp(t * -3.0))
    p = cheb_interpolate(samples, dom)
    for j in range(K + 1):
        v = cheb_eval(p, t[j])
        assert abs(v.mid() - samples[j].mid()) <= 1e-13


def _exact_interp_error(K, f, domain, npts=1000):
    """Dense-grid sup of f - P_K f evaluated in extended precision."""
    t0, t1 = domain
    nodes = [mpmath.mpf(t0) + (1 - mpmath.cos(j * mpmath.pi / K)) * (t1 - t0) / 2 for j in range(K + 1)]
    vals = [f(x) for x in nodes]

    def interp(x):
        return mpmath.fsum(vals[j] * mpmath.fprod((x - nodes[i]) / (nodes[j] - nodes[i])
                                                  for i in range(K + 1) if i != j)
                           for j in range(K + 1))

    grid = [mpmath.mpf(t0) + (t1 - t0) * mpmath.mpf(i) / (npts - 1) for i in range(npts)]
    return max(abs(f(x) - interp(x)) for x in grid)


def test_exponential_family_bounds():
    lam = CInterval.point(np.array([-1.0]))
    b10 = float(interp_error_bound(InterpErrorModel("exponential_family", lam, 1.0, 10, amp=[1.0])).hi[0])
    b14 = float(interp_error_bound(InterpErrorModel("exponential_family", lam, 1.0, 14, amp=[1.0])).hi[0])
    true10 = _exact_interp_error(10, lambda x: mpmath.exp(-x), (0, 1), npts=400)
    assert b10 <= 1e-9
    assert b10 >= true10
    assert b14 <= b10 / 10


def test_constant_family_bound_vanishes():
    lam = CInterval.point(np.array([0.0]))
    b = interp_error_bound(InterpErrorModel("exponential_family", lam, 0.7, 8, amp=[3.0]))
    assert float(b.hi[0]) < 1e-30


def test_integral_family_dominates_true_error():
    lam = -7.0 + 2.0j
    q = [0.4, -0.3, 0.2, 0.05]
    delta = 0.6
    K = 8

    def qf(s):
        x = 2 * s / delta - 1
        return sum(c * mpmath.chebyt(k, x) for k, c in enumerate(q))

    def f(h):
        return mpmath.quad(lambda s: mpmath.exp((h - s) * lam) * qf(s), [0, h])

    true = _exact_interp_error(K, f, (0, delta), npts=60)
    model = InterpErrorModel("integral_family", CInterval.point(np.array([lam])), delta, K,
                             qmag=np.abs(np.array(q))[:, None])
    assert float(interp_error_bound(model).hi[0]) >= true


def test_c0_plus_error_dominates_sup():
    lam = -3.0
    delta = 1.0
    K = 12
    t = nodes_in_domain((0.0, delta), K)
    samples = CInterval(iv_exp(t * lam))
    p = cheb_interpolate(samples, (0.0, delta))
    err = interp_error_bound(InterpErrorModel("exponential_family", CInterval.point(np.array([lam])),
                                              delta, K, amp=[1.0]))
    total = float(c0_bound(p).hi) + float(err.hi[0])
    grid = np.linspace(0, delta, 1000)
    assert total >= np.max(np.abs(np.exp(lam * grid)))


def _phi_exact(z, k):
    with mpmath.workprec(600):
        z = mpmath.mpc(z)
        if z == 0:
            return 1 / mpmath.factorial(k)
        return (mpmath.exp(z) - mpmath.fsum(z ** j / mpmath.factorial(j) for j in range(k))) / z ** k


def test_phi_functions_against_oracle():
    zs = np.array([0.0, 1e-3, 0.45, -1.7 + 0.5j, -40.0, -400 + 30j, 25j, 3.0, -2e4])
    ph = phi_functions(CInterval.point(zs), 10)
    for k in range(11):
        for i, z in enumerate(zs):
            ex = _phi_exact(z, k)
            e = ph[k, i]
            assert mpmath.mpf(float(e.re.lo)) <= ex.real <= mpmath.mpf(float(e.re.hi))
            assert mpmath.mpf(float(e.im.lo)) <= ex.imag <= mpmath.mpf(float(e.im.hi))
            assert float(np.max(e.re.width())) <= 1e-10 * max(1.0, abs(ex))


def test_cheb_to_monomial():
    M = cheb_to_monomial(7)
    for v in (0.0, 0.3, 1.0):
        mono = np.array([v ** d for d in range(8)])
        ref = [np.cos(k * np.arccos(2 * v - 1)) for k in range(8)]
        assert np.allclose(M.mid() @ mono, ref)


def test_time_average_and_derivative():
    c = CInterval.point(np.array([1.0, 5.0, 3.0]))
    assert time_average(c).contains(1.0 - 1.0)
    d = cheb_derivative(c, 2.0).mid()
    assert np.allclose(d[:2], np.polynomial.chebyshev.chebder([1.0, 5.0, 3.0]))


def test_space_time_product_matches_float():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 4))
    B = rng.standard_normal((4, 4))
    a = STSeq.from_array(A, 1.1, "even", (0, 1))
    b = STSeq.from_array(B, 1.1, "even", (0, 1))
    c = st_multiply(a, b)
    assert c.K == 5 and c.N == 6
    for s in (-0.7, 0.2, 0.9):
        ua = np.polynomial.chebyshev.chebval(s, A)
        ub = np.polynomial.chebyshev.chebval(s, B)
        fa = np.concatenate([ua[:0:-1], ua])
        fb = np.concatenate([ub[:0:-1], ub])
        ref = np.convolve(fa, fb)[6:]
        got = c.eval_unit(s).mid()
        assert np.allclose(got, ref)
