import mpmath
import numpy as np
import pytest

from parab.errors import UsageError
from parab.interval import CInterval, iv_matmul
from parab.linear import (
    DomainLinearOp, build_linear_op, diagonalize_block, enclose_inverse, mu_bound, propagator_chain,
    weighted_opnorm_upper,
)
from parab.problem import PdeProblem, _poly, swift_hohenberg
from parab.solver import integrate_numeric, kernel_averages


def zero_kernels(J, N):
    return [np.zeros(2 * N + 1, dtype=complex) for _ in range(2 * J)]


def const_kernel(N, c):
    k = np.zeros(2 * N + 1, dtype=complex)
    k[N] = c
    return k


def contains_identity(op):
    prod = iv_matmul(op.Qinv, op.Q_iv)
    eye = np.eye(prod.shape[0])
    return bool(np.all(prod.re.lo <= eye) and np.all(eye <= prod.re.hi)
                and np.all(prod.im.lo <= 0) and np.all(prod.im.hi >= 0))


def test_diagonal_input():
    p = PdeProblem(2, [_poly([0])] * 4, "even")
    op = build_linear_op(p, zero_kernels(2, 6), 6, 1.1, 1.0)
    assert np.array_equal(op.Q, np.eye(7))
    assert np.array_equal(op.lam, -np.arange(7.0) ** 4)
    assert contains_identity(op)


def test_constant_kernel_shifts_spectrum():
    c = 0.7
    p = PdeProblem(1, [_poly([0, c]), _poly([0])], "none")
    ks = [const_kernel(5, c), const_kernel(5, 0)]
    op = build_linear_op(p, ks, 5, 1.1, 1.0)
    assert np.allclose(op.lam, -np.arange(-5, 6) ** 2 + c, atol=1e-14)
    lam = op.tail_lambda(np.array([6, -9]))
    assert lam.contains(np.array([-36 + c, -81 + c]))


def test_lambda_tail_examples():
    p = PdeProblem(2, [_poly([0])] * 4, "even")
    op = build_linear_op(p, zero_kernels(2, 2), 2, 1.1, 1.0)
    assert op.tail_lambda(3).contains(-81.0)
    # J = 1 with vbar_0^(1) = 1: lambda_2 = -4 + 2i
    p1 = PdeProblem(1, [_poly([0]), _poly([0, 1])], "none")
    op1 = build_linear_op(p1, [const_kernel(1, 0), const_kernel(1, 1)], 1, 1.1, 1.0)
    assert op1.tail_lambda(2).contains(-4 + 2j)
    assert op1.tail_lambda(-2).contains(-4 - 2j)


def test_certified_monotone_index():
    p = PdeProblem(2, [_poly([0, 300]), _poly([0]), _poly([0, -18]), _poly([0])], "even")
    ks = [const_kernel(4, 300), const_kernel(4, 0), const_kernel(4, -18), const_kernel(4, 0)]
    op = build_linear_op(p, ks, 4, 1.05, 1.0)
    n = np.arange(op.n_star, op.n_star + 200)
    re = op.tail_re(n)
    assert np.all(re.hi[1:] < re.lo[:-1])
    # the sup beyond N_L agrees with a brute-force scan
    brute = op.tail_re(np.arange(5, 400))
    assert op.sup_tail_re(4).contains(np.max(brute.mid()))


def test_inverse_enclosure_is_tight_and_contains_identity():
    rng = np.random.default_rng(0)
    N = 20
    for _ in range(5):
        A = np.diag(-np.arange(N + 1.0) ** 2) + 0.5 * (lambda S: S + S.T)(rng.standard_normal((N + 1, N + 1)))
        lam, Q, Qinv, _ = diagonalize_block(A, "even", 1.05, N)
        width = max(np.max(Qinv.re.hi - Qinv.re.lo), np.max(Qinv.im.hi - Qinv.im.lo))
        assert width <= 1e-12
        op = DomainLinearOp(1, "even", 1.05, N, Q, lam, Qinv, [0, 0], 1.0)
        assert contains_identity(op)


def test_perturbation_retry_reduces_inverse_norm():
    # a Jordan block: eigenvectors nearly parallel, Q^-1 enormous
    N = 3
    A = np.diag([-1.0, -1.0, -4.0, -9.0]) + np.diag([1.0, 0, 0], 1)
    lam0, Q0 = np.linalg.eig(A)
    lam, Q, Qinv, perturbed = diagonalize_block(A, "even", 1.0, N)
    assert perturbed
    plain = np.abs(np.linalg.inv(Q0)).sum(axis=0).max()
    assert weighted_opnorm_upper(Qinv.mag(), "even", 1.0, N) < plain


def test_enclose_inverse_rejects_singular():
    from parab.errors import DiagonalizationError
    Q = np.array([[1.0, 1.0, 0], [1.0, 1.0, 0], [0, 0, 1.0]])
    with pytest.raises((DiagonalizationError, np.linalg.LinAlgError)):
        enclose_inverse(Q, "none", 1.0, 1)


@pytest.fixture(scope="module")
def sh_ops():
    p, u0 = swift_hohenberg()
    g = np.linspace(0, 0.3 / 81, 6)
    sol = integrate_numeric(p, u0, g, 16, 5)
    ops = [build_linear_op(p, kernel_averages(p, sol, m), 16, 1.05, g[m + 1] - g[m]) for m in range(sol.M)]
    return ops, g


def test_chain_identity_and_grouping(sh_ops):
    ops, g = sh_ops
    ch = propagator_chain(ops, g)
    k = len(ops[0].n)
    assert np.array_equal(ch.chain(1, 0).mid(), np.eye(k))
    for m, l in [(3, 0), (4, 1), (5, 2), (5, 0)]:
        a, b = ch.chain(m, l), ch.chain_ungrouped(m, l)
        overlap = ((a.re.lo <= b.re.hi) & (b.re.lo <= a.re.hi) & (a.im.lo <= b.im.hi) & (b.im.lo <= a.im.hi))
        assert overlap.all()
    # conjugated chain equals Q^(m)^-1 L^(m,i) Q^(i)
    P = ch.conjugated(4, 1)
    direct = iv_matmul(iv_matmul(ops[3].Qinv, ch.chain(4, 1)), ops[0].Q_iv)
    assert np.allclose(P.mid(), direct.mid(), atol=1e-9 * np.abs(direct.mid()).max())


def test_chain_commuting_case():
    p = PdeProblem(1, [_poly([0]), _poly([0])], "even")
    ops = [build_linear_op(p, zero_kernels(1, 3), 3, 1.1, 0.5) for _ in range(2)]
    ch = propagator_chain(ops, [0, 0.5, 1.0])
    L = ch.chain(2, 0)
    assert L.contains(np.diag(np.exp(-0.5 * np.arange(4.0) ** 2)))


def test_mu_examples():
    p = PdeProblem(1, [_poly([0, 4.3]), _poly([0])], "none")
    ks = [const_kernel(1, 4.3), const_kernel(1, 0)]
    op = build_linear_op(p, ks, 1, 1.1, 2.0)
    # sup_{|n|>1} Re lambda_n = -4 + 4.3 = 0.3
    ref = mpmath.exp(2 * (mpmath.mpf(4.3) - 4))
    mu = mu_bound([op], [0.0, 2.0], 1, 0, 1)
    assert mu.lo <= ref <= mu.hi and abs(float(ref) - np.exp(0.6)) < 1e-14
    assert float(mu_bound([op], [0.0, 2.0], 1, 1, 1).hi) == 1.0
    q = PdeProblem(1, [_poly([0]), _poly([0])], "none")
    ops = [build_linear_op(q, zero_kernels(1, 2), 2, 1.1, 1.0) for _ in range(3)]
    g = [0.0, 1.0, 2.0, 3.0]
    one_ulp = 1.0 + 4 * np.finfo(float).eps  # exp(0) is enclosed, not computed exactly
    assert float(mu_bound(ops, g, 3, 2, 2).hi) <= one_ulp
    # empty middle sum reduces to the single-domain factor
    assert float(mu_bound(ops, g, 2, 1, 2).hi) <= one_ulp
    assert mu_bound(ops, g, 3, 0, 2).contains(np.exp(-2 * 9.0))
    with pytest.raises(UsageError):
        mu_bound(ops, g, 3, 0, 1)
