from fractions import Fraction

import numpy as np
import pytest

from parab.errors import UsageError
from parab.interval import CInterval, Interval
from parab.sequences import (
    DiagonalTail, FourierSeq, Poly, SeqOperator, TailBoundedSeq, apply_poly, conv_matrix,
    conv_matrix_float, convolve, derivative_seq, l1nu_norm, mode_indices, opnorm_l1nu, project,
)


def rand_seq(rng, N, nu, sym="none", scale=1.0):
    if sym == "none":
        v = rng.standard_normal(2 * N + 1) + 1j * rng.standard_normal(2 * N + 1)
    elif sym == "even":
        v = rng.standard_normal(N + 1).astype(complex)
    else:
        v = 1j * rng.standard_normal(N)
    return FourierSeq.from_array(scale * v, nu, sym)


def two_sided_dict(a):
    return {n: a.coefficient(n).mid() for n in range(-a.N, a.N + 1)}


def brute_convolution(a, b):
    """Exact rational double sum on the (real and imaginary) float data."""
    da = {n: (Fraction(z.real), Fraction(z.imag)) for n, z in two_sided_dict(a).items()}
    db = {n: (Fraction(z.real), Fraction(z.imag)) for n, z in two_sided_dict(b).items()}
    out = {}
    for n in range(-(a.N + b.N), a.N + b.N + 1):
        re = Fraction(0)
        im = Fraction(0)
        for m, (ar, ai) in da.items():
            if n - m in db:
                br, bi = db[n - m]
                re += ar * br - ai * bi
                im += ar * bi + ai * br
        out[n] = (re, im)
    return out


def test_norm_examples():
    assert l1nu_norm(FourierSeq.delta(1.5)).contains(1.0)
    a = FourierSeq.from_array([0.5, 0.0, 0.5], 2.0, "none")
    assert l1nu_norm(a).contains(2.0)
    a_even = FourierSeq.from_array([0.0, 0.5], 2.0, "even")
    assert l1nu_norm(a_even).contains(2.0)
    z = l1nu_norm(FourierSeq.zeros(4, 1.3))
    assert float(z.lo) == 0.0 and float(z.hi) == 0.0


def test_convolution_examples():
    rng = np.random.default_rng(3)
    b = rand_seq(rng, 5, 1.2, "even")
    db = FourierSeq.delta(1.2) * b
    for n in range(6):
        assert db.coefficient(n).contains(b.coefficient(n).mid())
    a = FourierSeq.from_array([0.0, 1.0], 1.0, "even")
    aa = convolve(a, a)
    assert aa.coefficient(0).contains(2.0)
    assert aa.coefficient(2).contains(1.0) and aa.coefficient(-2).contains(1.0)
    assert aa.coefficient(1).contains(0.0)


@pytest.mark.parametrize("syms", [("none", "none"), ("even", "even"), ("odd", "odd"),
                                  ("even", "odd"), ("none", "even")])
def test_convolution_matches_brute_force(syms):
    rng = np.random.default_rng(hash(syms) % 2 ** 32)
    for N in (1, 7, 32):
        a = rand_seq(rng, N, 1.1, syms[0])
        b = rand_seq(rng, max(1, N // 2), 1.1, syms[1])
        c = convolve(a, b)
        expected_sym = {("even", "odd"): "odd", ("odd", "odd"): "even", ("even", "even"): "even"}.get(syms, "none")
        assert c.sym == expected_sym
        ref = brute_convolution(a, b)
        for n, (re, im) in ref.items():
            z = c.coefficient(n)
            assert Fraction(float(z.re.lo)) <= re <= Fraction(float(z.re.hi))
            assert Fraction(float(z.im.lo)) <= im <= Fraction(float(z.im.hi))


def test_banach_algebra_property():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        N1, N2 = rng.integers(0, 8, size=2)
        sym = ["none", "even"][rng.integers(0, 2)]
        a = rand_seq(rng, int(N1), 1.3, sym)
        b = rand_seq(rng, int(N2), 1.3, sym)
        lhs = l1nu_norm(convolve(a, b))
        rhs = l1nu_norm(a) * l1nu_norm(b)
        assert float(lhs.lo) <= float(rhs.hi)


def test_mismatched_nu():
    with pytest.raises(UsageError):
        convolve(FourierSeq.delta(1.1), FourierSeq.delta(1.2))


def test_apply_poly():
    rng = np.random.default_rng(5)
    a = rand_seq(rng, 4, 1.1, "even")
    ident = apply_poly(Poly([0.0, 1.0]), a)
    for n in range(5):
        assert ident.coefficient(n).contains(a.coefficient(n).mid())
    g = Poly([0.0, -2.0, 0.0, 1.0])
    assert apply_poly(g, FourierSeq.delta(1.5)).coefficient(0).contains(-1.0)
    # |g| dominance on random small inputs
    for _ in range(50):
        x = rand_seq(rng, 3, 1.2, "none", 0.3)
        y = rand_seq(rng, 3, 1.2, "none", 0.3)
        lhs = l1nu_norm(apply_poly(g, x + y))
        s = float((l1nu_norm(x) + l1nu_norm(y)).hi)
        rhs = g.abs_poly().eval(Interval(s))
        assert float(lhs.lo) <= float(rhs.hi)


def test_poly_parity_and_derivative():
    g = Poly([0.0, -2.0, 0.0, 1.0])
    assert g.parity() == "odd"
    dg = g.derivative()
    assert dg.parity() == "even"
    assert dg.eval(Interval(2.0)).contains(10.0)
    assert Poly([1.0, 1.0]).parity() == "none"


def test_projection_properties():
    rng = np.random.default_rng(9)
    d = FourierSeq.delta(1.3)
    assert project(d, 0, "leq").coefficient(0).contains(1.0)
    a = rand_seq(rng, 1, 1.3)
    assert l1nu_norm(project(a, 1, "gt")).hi == 0.0
    for _ in range(20):
        N = int(rng.integers(1, 10))
        a = rand_seq(rng, N, 1.2)
        k = int(rng.integers(0, N + 1))
        s = project(a, k, "leq") + project(a, k, "gt")
        for n in range(-N, N + 1):
            assert s.coefficient(n).contains(a.coefficient(n).mid())
        p = project(a, k, "leq")
        pp = project(p, k, "leq")
        assert pp.N == p.N
        q = project(project(a, k, "gt"), k, "gt")
        for n in range(-N, N + 1):
            assert q.coefficient(n).contains(project(a, k, "gt").coefficient(n).mid())


def test_tail_bounded_projection():
    fin = FourierSeq.from_array([1.0, 0.5, 0.25], 1.1, "even")
    t = TailBoundedSeq(fin, 1e-6, 2)
    low = project(t, 1, "leq")
    assert float(low.tail_norm.hi) == 0.0
    high = project(t, 1, "gt")
    assert float(high.tail_norm.hi) == 1e-6
    assert high.finite.coefficient(1).contains(0.0)


def test_derivative_examples():
    rng = np.random.default_rng(2)
    a = rand_seq(rng, 3, 1.1)
    assert derivative_seq(a, 0) is a
    one = FourierSeq.from_array([0.0, 0.0, 0.0, 1.0, 0.0], 1.0, "none")
    assert derivative_seq(one, 2).coefficient(1).contains(-1.0)
    o = rand_seq(rng, 4, 1.1, "odd")
    d = derivative_seq(o, 1)
    assert d.sym == "even"
    for n in range(1, 5):
        assert d.coefficient(n).contains(1j * n * o.coefficient(n).mid())
    assert derivative_seq(o, 3, absval=True).coefficient(2).contains(8 * o.coefficient(2).mid())


def test_opnorm_examples():
    ident = SeqOperator(CInterval.point(np.eye(5)), 1.4, "none")
    assert opnorm_l1nu(ident).contains(1.0)
    tail = DiagonalTail(lambda n: Interval(1.0) / Interval((n * n).astype(float)), 1)
    t = SeqOperator(CInterval.zeros((7, 7)), 1.7, "none", tail=tail)
    assert opnorm_l1nu(t).contains(1.0 / 16.0)
    blk = SeqOperator(CInterval.point(np.array([[0.0, 2.0], [1.0, 0.0]])), 1.0, "odd")
    assert opnorm_l1nu(blk).contains(2.0)


def test_opnorm_dominates_sampled_ratios():
    rng = np.random.default_rng(4)
    for sym in ("none", "even"):
        n = len(mode_indices(sym, 6))
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = SeqOperator(CInterval.point(M), 1.25, sym)
        bound = float(opnorm_l1nu(A).hi)
        for _ in range(1000):
            a = rand_seq(rng, 6, 1.25, sym)
            ratio = float(l1nu_norm(A.apply(a)).lo) / float(l1nu_norm(a).hi)
            assert ratio <= bound


def test_conv_matrix_matches_convolution():
    rng = np.random.default_rng(8)
    for sym_k, sym_in in (("even", "even"), ("even", "odd"), ("odd", "odd"), ("none", "none")):
        k = rand_seq(rng, 3, 1.1, sym_k)
        h = rand_seq(rng, 5, 1.1, sym_in)
        A, sym_out = conv_matrix(k.two_sided(), sym_k, sym_in, 8, 5)
        Af, _ = conv_matrix_float(k.two_sided().mid(), sym_k, sym_in, 8, 5)
        ref = convolve(k, h)
        got = A.mid() @ h.mid()
        assert np.allclose(Af, A.mid())
        for i, n in enumerate(mode_indices(sym_out, 8)):
            assert abs(got[i] - ref.coefficient(int(n)).mid()) < 1e-12
