import mpmath
import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb
from scipy.integrate import solve_ivp

from parab.bounds import (
    TailTable, chi_bound, compute_bounds, exp_integral_upper, integrate_unit, modal_flow,
)
from parab.interval import CInterval, Interval
from parab.linear import build_linear_op, mu_bound
from parab.pipeline import linear_ops
from parab.problem import InitialData, PdeProblem, _poly, heat, kuramoto_sivashinsky, swift_hohenberg
from parab.sequences import FourierSeq, mode_indices, mode_weights
from parab.solver import SpectralModel, integrate_numeric

SH_STEP = 0.5 / 81 / 20


def test_integrate_unit_matches_numpy_chebint():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((7, 3)) + 1j * rng.standard_normal((7, 3))
    got = integrate_unit(CInterval.point(a))
    for col in range(3):
        # eta in [0, 1] maps to s = 2 eta - 1, d eta = ds / 2, lower bound s = -1
        ref = npcheb.chebint(a[:, col], lbnd=-1) * 0.5
        assert np.allclose(got[:, col].mid(), ref, atol=1e-14)


def test_exp_integral_upper_against_mpmath():
    for x in [-700.0, -30.0, -1.0, -1e-9, 0.0, 1e-9, 0.5, 3.0, 40.0]:
        ref = mpmath.mpf(1) if x == 0 else mpmath.expm1(mpmath.mpf(x)) / mpmath.mpf(x)
        up = float(exp_integral_upper(x)[0])
        assert up >= ref and up <= ref * (1 + 1e-12) + 1e-300


@pytest.mark.parametrize("z, delta", [(-0.7 + 2j, 0.3), (3.0, 0.1), (-40.0 + 5j, 0.05), (-1e-3, 1.0)])
def test_modal_flow_encloses_ode_solution(z, delta):
    # f' = z f + delta q(eta), f(0) = c, q polynomial in Chebyshev form on [0, 1]
    c = 0.4 - 0.3j
    q = np.array([0.2, -0.1 + 0.05j, 0.03])
    qf = lambda eta: npcheb.chebval(2 * eta - 1, q)
    def rhs(eta, y):
        f = z * (y[0] + 1j * y[1]) + delta * qf(eta)
        return [f.real, f.imag]

    sol = solve_ivp(rhs, (0, 1), [c.real, c.imag], rtol=1e-12, atol=1e-14, dense_output=True,
                    method="DOP853")
    poly, rad, end = modal_flow(CInterval.point(np.array([c])), CInterval.point(q.reshape(-1, 1)),
                                CInterval.point(np.array([z])), Interval(delta))
    exact_end = complex(*sol.y[:, -1])
    # the ODE reference itself carries ~1e-11 error
    assert abs(end[0].mid() - exact_end) <= end[0].rad() + 1e-9
    P = poly.mid()[:, 0]
    for eta in np.linspace(0, 1, 41):
        val = complex(*sol.sol(eta))
        approx = npcheb.chebval(2 * eta - 1, P)
        assert abs(val - approx) <= rad[0] + 1e-9


def test_chi_bound_against_brute_force_scan():
    p, _ = swift_hohenberg()
    ks = [np.zeros(2 * 6 + 1, complex) for _ in range(4)]
    ks[0][6], ks[2][6] = 250.0, -10.0
    op = build_linear_op(p, ks, 6, 1.05, 0.01)
    n = np.arange(7, 200000)
    re = -(n.astype(float) ** 4) + 250 + 10 * n.astype(float) ** 2
    for j in range(4):
        for delta in [0.01, np.inf]:
            if np.isinf(delta):
                bt = 1 / np.abs(re)
            else:
                bt = delta * np.expm1(delta * re) / (delta * re)
            brute = np.max(n.astype(float) ** j * bt)
            got = chi_bound(op, j, delta)
            assert got >= brute and got <= brute * (1 + 1e-6)


def test_tail_table_mu_matches_linear_mu():
    p, u0 = swift_hohenberg()
    g = np.linspace(0, 4 * SH_STEP, 5)
    sol = integrate_numeric(p, u0, g, 10, 4)
    ops = linear_ops(p, sol, 10)
    table = TailTable(ops, g, 40)
    for m, i in [(4, 0), (3, 1), (2, 1), (4, 2)]:
        a = table.mu(m, i, 10)
        b = mu_bound(ops, g, m, i, 10)
        assert b.lo <= a * (1 + 1e-12) and a <= b.hi * (1 + 1e-12)


def test_heat_Y_is_tiny_and_W_vanishes():
    p, u0 = heat()
    g = np.linspace(0, 1, 5)
    sol = integrate_numeric(p, u0, g, 4, 18)
    b = compute_bounds(p, sol, linear_ops(p, sol, 4))
    assert np.all(b.Y <= 1e-8)
    assert np.all(b.W == 0) and np.all(b.Z <= 1e-12)


def test_zero_solution_gives_zero_defect():
    p, _ = swift_hohenberg()
    z = InitialData(FourierSeq.zeros(6, 1.05, "even"), p)
    sol = integrate_numeric(p, z, [0.0, SH_STEP, 2 * SH_STEP], 6, 3)
    b = compute_bounds(p, sol, linear_ops(p, sol, 6))
    assert np.all(b.Y <= 1e-300)  # only outward-rounding residue


def test_second_derivative_amplitude_ks():
    p, _ = kuramoto_sivashinsky()
    # v^2 / alpha has second derivative 2 / alpha; alpha = 0.127
    amp = p.gs[1].derivative().derivative().abs_poly().eval(Interval(0.3))
    assert amp.contains(2 / 0.127)


def _float_setup(p, sol, op, Nr):
    """Dense float generator on |n| <= Nr: the block Q Lambda Q^-1 plus the tail diagonal."""
    n = mode_indices(p.symmetry, Nr)
    L = np.zeros((len(n), len(n)), complex)
    blk = np.abs(n) <= op.N_L
    L[np.ix_(blk, blk)] = op.Q @ np.diag(op.lam) @ np.linalg.inv(op.Q)
    tail = np.nonzero(~blk)[0]
    L[tail, tail] = op.tail_lambda(n[tail]).mid()
    w = mode_weights(p.symmetry, n, op.nu).mid()
    lam, V = np.linalg.eig(L)
    Vi = np.linalg.inv(V)
    expL = lambda t: (V * np.exp(lam * t)) @ Vi
    return n, L, w, expL


def _piece_value(sol, m, s, deriv=False):
    t0, t1 = sol.domain(m)
    pc = sol.pieces[m]
    sig = 2 * (s - t0) / (t1 - t0) - 1
    if deriv:
        return npcheb.chebval(sig, npcheb.chebder(pc)) * 2 / (t1 - t0)
    return npcheb.chebval(sig, pc)


@pytest.fixture(scope="module")
def sh_small():
    p, u0 = swift_hohenberg()
    N = 8
    g = [0.0, SH_STEP]
    sol = integrate_numeric(p, u0, g, N, 5)
    ops = linear_ops(p, sol, N)
    return p, sol, ops, compute_bounds(p, sol, ops)


def test_Y_dominates_dense_quadrature_defect(sh_small):
    p, sol, ops, b = sh_small
    N = sol.N
    Nr = 3 * N
    n, L, w, expL = _float_setup(p, sol, ops[0], Nr)
    model = SpectralModel(p, Nr)
    pad = lambda v: np.concatenate([v, np.zeros(len(n) - len(v))])
    rho = lambda s: model.rhs(pad(_piece_value(sol, 0, s))) - pad(_piece_value(sol, 0, s, True))
    x, wq = np.polynomial.legendre.leggauss(40)
    worst = 0.0
    for h in np.linspace(SH_STEP / 25, SH_STEP, 25):
        s = 0.5 * h * (x + 1)
        d = sum(0.5 * h * wk * expL(h - sk) @ rho(sk) for sk, wk in zip(s, wq))
        worst = max(worst, float(w @ np.abs(d)))
    assert b.Y[0] >= worst
    assert b.Y[0] <= 10 * worst


def test_Z_dominates_sampled_operator_norm(sh_small):
    p, sol, ops, b = sh_small
    N = sol.N
    Nbig = 6 * N
    n, L, w, expL = _float_setup(p, sol, ops[0], Nbig)
    model = SpectralModel(p, Nbig)
    x, wq = np.polynomial.legendre.leggauss(24)
    pad = lambda v: np.concatenate([v, np.zeros(len(n) - len(v))])
    best = 0.0
    for k in range(0, 2 * N + 1):
        e = np.zeros(len(n), complex)
        e[k] = 1.0 / w[k]
        for h in np.linspace(SH_STEP / 6, SH_STEP, 6):
            s = 0.5 * h * (x + 1)
            acc = np.zeros(len(n), complex)
            for sk, wk in zip(s, wq):
                Dg = model.jacobian(pad(_piece_value(sol, 0, sk))) - L
                acc += 0.5 * h * wk * expL(h - sk) @ (Dg @ e)
            best = max(best, float(w @ np.abs(acc)))
    assert b.Z[0, 0] >= best
    assert best > 0


def test_single_domain_pieces_are_consistent():
    # bounds of the first domain do not depend on what follows it
    p, u0 = swift_hohenberg()
    g = np.linspace(0, 3 * SH_STEP, 4)
    sol = integrate_numeric(p, u0, g, 8, 4)
    ops = linear_ops(p, sol, 8)
    full = compute_bounds(p, sol, ops)
    from parab.solver import ApproxSolution
    one = ApproxSolution(p, g[:2], sol.pieces[:1], sol.N, sol.nu, sol.initial, sol.eps_in)
    b1 = compute_bounds(p, one, ops[:1])
    assert b1.Y[0] == full.Y[0]
    assert b1.Z[0, 0] == full.Z[0, 0] and b1.W[0, 0] == full.W[0, 0]


def test_constant_coefficient_problem_has_no_coupling():
    # g_0(u) = c u is absorbed exactly into L, so Z and W vanish
    p = PdeProblem(1, [_poly([0, "0.7"]), _poly([0])], "even")
    u0 = InitialData.from_modes({1: "0.5", 3: "0.1"}, 1.05, "even", p)
    sol = integrate_numeric(p, u0, [0.0, 0.5, 1.0], 6, 18)
    b = compute_bounds(p, sol, linear_ops(p, sol, 6))
    assert np.all(b.W == 0) and np.all(b.Z <= 1e-12)
    assert np.all(b.Y <= 1e-10)
