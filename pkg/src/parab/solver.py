"""Non-rigorous approximate solutions: Chebyshev collocation in time, Fourier Galerkin in space.

Nothing here is trusted by the proof.  The bounds engine measures how good
the resulting piecewise polynomial is.
"""

import functools
import logging
import warnings

import numpy as np
import scipy.linalg

from .chebyshev import (
    cheb_derivative_float, eval_matrix_float, interp_values_float, time_average, time_average_float,
)
from .errors import SolverError, UsageError
from .interval import CInterval
from .sequences import FourierSeq, conv_matrix_float, mode_indices

log = logging.getLogger(__name__)


def _quiet(fn):
    # divergence is reported through SolverError, not through numpy warnings
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            return fn(*args, **kwargs)
    return wrapper


# float spectral kernel ------------------------------------------------------

def one_to_two(c, sym, N):
    """One-sided storage (..., nmodes) -> two-sided (..., 2N+1)."""
    c = np.asarray(c, dtype=complex)
    if sym == "none":
        return c
    if sym == "even":
        return np.concatenate([c[..., :0:-1], c], axis=-1)
    zero = np.zeros(c.shape[:-1] + (1,), dtype=complex)
    return np.concatenate([-c[..., ::-1], zero, c], axis=-1)


def two_to_one(c, sym, N):
    if sym == "none":
        return c
    if sym == "even":
        return c[..., N:]
    return c[..., N + 1:]


class SpectralModel:
    """Float Galerkin model of a PdeProblem truncated to |n| <= N."""

    def __init__(self, problem, N):
        self.p = problem
        self.N = int(N)
        self.sym = problem.symmetry
        self.n = mode_indices(self.sym, self.N)
        self.nm = len(self.n)
        J = problem.J
        self.lin = -(self.n.astype(float) ** (2 * J))
        self.gs = problem.gs_float()
        self.dgs = [np.polynomial.polynomial.polyder(g) if len(g) > 1 else np.zeros(1) for g in self.gs]
        deg = max(len(g) - 1 for g in self.gs)
        self.deg = max(deg, 1)
        # grid large enough for exact Galerkin projection of g(u) and of g'(u) * h
        need = (self.deg + 1) * self.N + 2
        self.P = int(2 ** np.ceil(np.log2(max(need, 8))))
        self.dfac = [(1j * self.n) ** j for j in range(2 * J)]
        self.active = problem.active_orders()

    # transforms
    def physical(self, c):
        c2 = one_to_two(c, self.sym, self.N)
        N, P = self.N, self.P
        buf = np.zeros(c2.shape[:-1] + (P,), dtype=complex)
        buf[..., :N + 1] = c2[..., N:]
        if N:
            buf[..., P - N:] = c2[..., :N]
        return np.fft.ifft(buf, axis=-1) * P

    def modes(self, v, N=None):
        """Two-sided modes |n| <= N of grid values."""
        N = self.N if N is None else N
        f = np.fft.fft(v, axis=-1) / self.P
        return np.concatenate([f[..., self.P - N:], f[..., :N + 1]], axis=-1) if N else f[..., :1]

    @staticmethod
    def _horner(coeffs, v):
        acc = np.full(v.shape, coeffs[-1], dtype=complex)
        for c in coeffs[-2::-1]:
            acc = acc * v + c
        return acc

    def rhs(self, c):
        """F_N(u) for one-sided coefficient arrays (..., nm)."""
        c = np.asarray(c, dtype=complex)
        out = self.lin * c
        if not self.active:
            return out
        v = self.physical(c)
        for j in self.active:
            gv = self.modes(self._horner(self.gs[j], v))
            out = out + self.dfac[j] * two_to_one(gv, self.sym, self.N)
        return out

    def kernels(self, c, N=None):
        """Two-sided kernels g_j'(u), |n| <= N (default 2N), for j = 0..2J-1."""
        N = 2 * self.N if N is None else N
        v = self.physical(c)
        out = []
        for dg, sym in zip(self.dgs, self.kernel_syms()):
            k = self.modes(self._horner(dg, v), N)
            # parity fixes the phase: even kernels are real, odd ones imaginary
            if sym == "even":
                k = k.real.astype(complex)
            elif sym == "odd":
                k = 1j * k.imag
            out.append(k)
        return out

    def kernel_syms(self):
        sym = self.sym
        out = []
        for g in self.p.gs:
            par = g.derivative().parity()
            if sym == "none" or par == "none":
                out.append("none")
            elif sym == "even" or par in ("even", "zero"):
                out.append("even")
            else:
                out.append("odd")
        return out

    def block_from_kernels(self, ks):
        """-n^(2J) delta + sum_j (in)^j Pi_N (k_j * Pi_N .) on the one-sided basis."""
        A = np.diag(self.lin.astype(complex))
        syms = self.kernel_syms()
        for j in self.active:
            blk, sym_out = conv_matrix_float(np.asarray(ks[j], dtype=complex), syms[j], self.sym,
                                             self.N, self.N)
            rows = mode_indices(sym_out, self.N)
            blk = blk * ((1j * rows) ** j)[:, None]
            A = A + blk[np.isin(rows, self.n)]
        return A

    def jacobian(self, c):
        """Matrix of DF_N(u) on the one-sided basis."""
        if not self.active:
            return np.diag(self.lin.astype(complex))
        return self.block_from_kernels(self.kernels(c))

    def nonlinear(self, c):
        return self.rhs(c) - self.lin * np.asarray(c, dtype=complex)


# ETDRK4 -------------------------------------------------------------------

def _etd_coefficients(L, h, ncontour=64):
    """Kassam-Trefethen contour-integral coefficients for diagonal L (full circle, complex L allowed)."""
    r = np.exp(2j * np.pi * (np.arange(1, ncontour + 1) - 0.5) / ncontour)
    LR = h * L[:, None] + r[None, :]
    E = np.exp(h * L)
    E2 = np.exp(h * L / 2)
    Qc = h * np.mean((np.exp(LR / 2) - 1) / LR, axis=1)
    f1 = h * np.mean((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR ** 2)) / LR ** 3, axis=1)
    f2 = h * np.mean((2 + LR + np.exp(LR) * (-2 + LR)) / LR ** 3, axis=1)
    f3 = h * np.mean((-4 - 3 * LR - LR ** 2 + np.exp(LR) * (4 - LR)) / LR ** 3, axis=1)
    return E, E2, Qc, f1, f2, f3


def etdrk4(model, u, t_span, steps):
    """Fixed-step ETDRK4 from u over t_span; returns the end state."""
    h = t_span / steps
    if h == 0:
        return u
    E, E2, Qc, f1, f2, f3 = _etd_coefficients(model.lin.astype(complex), h)
    Nf = model.nonlinear
    for _ in range(steps):
        Nu = Nf(u)
        a = E2 * u + Qc * Nu
        Na = Nf(a)
        b = E2 * u + Qc * Na
        Nb = Nf(b)
        c = E2 * a + Qc * (2 * Nb - Nu)
        Nc = Nf(c)
        u = E * u + Nu * f1 + 2 * (Na + Nb) * f2 + Nc * f3
    return u


# collocation ----------------------------------------------------------------

def _unit_nodes(K):
    return -np.cos(np.pi * np.arange(K + 1) / K)


def collocation_diff_matrix(K, length):
    """Values at increasing extrema -> derivative values at the same nodes."""
    V = eval_matrix_float(K, _unit_nodes(K))
    W = interp_values_float(K)
    Dc = cheb_derivative_float(np.eye(K + 1), length)
    return V @ Dc @ W


@_quiet
def _solve_piece(model, u_start, t0, t1, K, m, tol=1e-13, maxit=40):
    length = t1 - t0
    s = _unit_nodes(K)
    D = collocation_diff_matrix(K, length)
    nm = model.nm
    # warm start: ETDRK4 between consecutive nodes
    U = np.empty((K + 1, nm), dtype=complex)
    U[0] = u_start
    for k in range(1, K + 1):
        dt = (s[k] - s[k - 1]) * length / 2
        steps = max(1, int(np.ceil(dt * max(1.0, np.max(np.abs(model.lin))) ** 0.25 * 4)))
        steps = min(steps, 64)
        U[k] = etdrk4(model, U[k - 1], dt, steps)
    D11 = D[1:, 1:]
    d0 = D[1:, :1]
    I = np.eye(nm)
    scale = 1.0 + np.abs(model.lin)

    def residual(X):
        return (D11 @ X + d0 * u_start[None, :]) - model.rhs(X)

    X = U[1:].copy()
    R = residual(X)
    nr = np.max(np.abs(R) / scale)
    for it in range(maxit):
        Jm = np.kron(D11, I).astype(complex)
        for i in range(K):
            sl = slice(i * nm, (i + 1) * nm)
            Jm[sl, sl] -= model.jacobian(X[i])
        try:
            dX = scipy.linalg.solve(Jm, R.reshape(-1), check_finite=False).reshape(K, nm)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"singular collocation system: {exc}", m) from None
        lam = 1.0
        while True:
            Xn = X - lam * dX
            Rn = residual(Xn)
            nrn = np.max(np.abs(Rn) / scale)
            if np.all(np.isfinite(Rn)) and (nrn <= (1 - 1e-4 * lam) * nr or nrn < tol):
                break
            lam /= 2
            if lam < 1e-6:
                break
        X, R, nr_old, nr = Xn, Rn, nr, nrn
        step = np.max(np.abs(lam * dX)) / max(1.0, np.max(np.abs(X)))
        if not np.all(np.isfinite(X)):
            break
        if step < 1e-15 or nr < tol or (step < 1e-12 and nr >= 0.5 * nr_old):
            U[1:] = X
            return U, float(nr)
    if nr < 1e-9 and np.all(np.isfinite(X)):
        U[1:] = X
        return U, float(nr)
    raise SolverError(f"Newton did not converge on subdomain {m} (residual {nr:.3e})", m)


@_quiet
def steady_newton(model, u, tol=1e-14, maxit=60, m=None):
    """Newton on F_N(u) = 0 from the seed u."""
    u = np.asarray(u, dtype=complex).copy()
    scale = 1.0 + np.abs(model.lin)
    r = model.rhs(u)
    nr = np.max(np.abs(r) / scale)
    for _ in range(maxit):
        try:
            du = scipy.linalg.solve(model.jacobian(u), r, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            raise SolverError("singular Jacobian in steady-state Newton", m) from None
        lam = 1.0
        while True:
            un = u - lam * du
            rn = model.rhs(un)
            nrn = np.max(np.abs(rn) / scale)
            if nrn <= (1 - 1e-4 * lam) * nr or nrn < tol or lam < 1e-6:
                break
            lam /= 2
        u, r, nr = un, rn, nrn
        if nr < tol or np.max(np.abs(lam * du)) < 1e-16 * max(1.0, np.max(np.abs(u))):
            break
    if not nr < 1e-9:
        raise SolverError(f"steady-state Newton did not converge (residual {nr:.3e})", m)
    if model.sym != "none":
        u = _clean_symmetry(u, model.sym)
    return u


def _clean_symmetry(u, sym):
    # even data has real coefficients, odd data purely imaginary ones
    return u.real.astype(complex) if sym == "even" else 1j * u.imag


# approximate solution ----------------------------------------------------------

class ApproxSolution:
    """Piecewise Chebyshev x Fourier approximate solution on a time grid."""

    def __init__(self, problem, grid, pieces, N, nu, initial, eps_in=0.0, residuals=None,
                 defects=None):
        grid = [float(t) for t in grid]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise UsageError("grid must be strictly increasing")
        if len(pieces) != len(grid) - 1:
            raise UsageError("need one piece per subdomain")
        self.problem = problem
        self.grid = grid
        self.pieces = [np.asarray(pc, dtype=complex) for pc in pieces]
        self.N = int(N)
        self.nu = float(nu)
        self.initial = initial
        self.eps_in = float(eps_in)
        self.residuals = list(residuals or [0.0] * len(pieces))
        self.defects = list(defects or [0.0] * len(pieces))
        if self.infinite and self.pieces[-1].shape[0] != 1:
            raise UsageError("the infinite piece must be time independent")

    @property
    def M(self):
        return len(self.pieces)

    @property
    def sym(self):
        return self.problem.symmetry

    @property
    def infinite(self):
        return np.isinf(self.grid[-1])

    @property
    def last_piece_constant(self):
        return self.pieces[-1].shape[0] == 1

    def orders(self):
        return [pc.shape[0] - 1 for pc in self.pieces]

    def domain(self, m):
        return self.grid[m], self.grid[m + 1]

    def locate(self, t):
        for m in range(self.M):
            if t <= self.grid[m + 1]:
                return m
        raise UsageError(f"time {t} beyond the grid")

    def eval_modes(self, t):
        """Float coefficients of u(t) (one-sided)."""
        m = self.locate(t)
        pc = self.pieces[m]
        if pc.shape[0] == 1:
            return pc[0]
        t0, t1 = self.domain(m)
        s = np.clip((2 * t - t0 - t1) / (t1 - t0), -1, 1)
        return eval_matrix_float(pc.shape[0] - 1, [s])[0] @ pc

    def eval_physical(self, t, y):
        """u(t, y) in internal variables."""
        c = one_to_two(self.eval_modes(t), self.sym, self.N)
        n = np.arange(-self.N, self.N + 1)
        return np.real(np.exp(1j * np.outer(np.atleast_1d(y), n)) @ c)

    def end_state(self, m):
        pc = self.pieces[m]
        return pc[0] if pc.shape[0] == 1 else pc.sum(axis=0)  # T_k(1) = 1

    def start_state(self, m):
        pc = self.pieces[m]
        K = pc.shape[0] - 1
        return (pc * ((-1.0) ** np.arange(K + 1))[:, None]).sum(axis=0)

    def piece_seq(self, m):
        """Interval coefficient table (K+1, nmodes) of piece m."""
        return CInterval.point(self.pieces[m])

    def interface_mismatch(self):
        w = self._weights()
        return [float(np.sum(np.abs(self.end_state(m) - self.start_state(m + 1)) * w))
                for m in range(self.M - 1) if self.pieces[m + 1].shape[0] > 1]

    def _weights(self):
        n = mode_indices(self.sym, self.N)
        w = self.nu ** np.abs(n)
        if self.sym != "none":
            w = w * np.where(n > 0, 2.0, 1.0)
        return w


def _initial_mid(u0, sym, N):
    fin = u0.finite
    c = fin.coeffs.mid()
    nm = len(mode_indices(sym, N))
    out = np.zeros(nm, dtype=complex)
    k = min(nm, c.shape[0])
    out[:k] = c[:k]
    return out


def _orders_list(orders, M):
    if np.isscalar(orders):
        orders = [int(orders)] * M
    orders = [int(k) for k in orders]
    if len(orders) != M or min(orders) < 1:
        raise UsageError("need one order >= 1 per finite subdomain")
    return orders


def _defect(model, pc, length, npts=None):
    """Sup over a fine grid of ||u' - F_N(u)|| (weights 1), a non-rigorous quality gauge."""
    K = pc.shape[0] - 1
    npts = npts or 4 * K + 3
    s = np.linspace(-1, 1, npts)
    V = eval_matrix_float(K, s)
    dV = V @ cheb_derivative_float(pc, length)
    uV = V @ pc
    return float(np.max(np.sum(np.abs(dV - model.rhs(uV)), axis=-1)))


def integrate_numeric(problem, u0, grid, N, orders, nu=None, start=None):
    """Solve on each subdomain in turn, starting each from the previous endpoint.

    ``start`` overrides the initial coefficients (float one-sided array).
    A final infinite subdomain is filled by a steady-state Newton solve.
    """
    grid = [float(t) for t in grid]
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("grid must be strictly increasing with at least one subdomain")
    infinite = np.isinf(grid[-1])
    nfin = len(grid) - 1 - int(infinite)
    orders = _orders_list(orders, nfin) if nfin else []
    model = SpectralModel(problem, N)
    nu = u0.finite.nu if nu is None else nu
    u = _initial_mid(u0, problem.symmetry, N) if start is None else np.asarray(start, dtype=complex)
    pieces, residuals, defects = [], [], []
    for m in range(nfin):
        t0, t1 = grid[m], grid[m + 1]
        U, res = _solve_piece(model, u, t0, t1, orders[m], m + 1)
        if problem.symmetry != "none":
            U = _clean_symmetry(U, problem.symmetry)
        coeffs = interp_values_float(orders[m]) @ U
        pieces.append(coeffs)
        residuals.append(res)
        defects.append(_defect(model, coeffs, t1 - t0))
        u = U[-1]
        log.debug("domain %d [%g, %g] K=%d residual %.2e", m, t0, t1, orders[m], res)
    if infinite:
        ust = steady_newton(model, u, m=nfin + 1)
        pieces.append(ust[None, :])
        residuals.append(float(np.max(np.abs(model.rhs(ust)) / (1 + np.abs(model.lin)))))
        defects.append(float(np.sum(np.abs(model.rhs(ust)))))
    if start is None:
        initial, eps = u0.finite, float(u0.eps_in.hi)
    else:
        initial, eps = FourierSeq.from_array(np.asarray(start, dtype=complex), nu, problem.symmetry), 0.0
    return ApproxSolution(problem, grid, pieces, N, nu, initial, eps, residuals, defects)


def time_average_piece(sol, m):
    """Rigorous enclosure of the time average of piece m as a FourierSeq."""
    avg = time_average(CInterval.point(sol.pieces[m]))
    return FourierSeq(avg, sol.nu, sol.sym)


def kernel_averages(problem, sol, m, model=None):
    """Float time averages of g_j'(u_m), two-sided arrays truncated to |n| <= N_u."""
    model = model or SpectralModel(problem, sol.N)
    pc = sol.pieces[m]
    K = pc.shape[0] - 1
    if K == 0:
        return model.kernels(pc[0], sol.N)
    # g_j' o u has degree (deg-1)*K in time: interpolate exactly, then average
    Kq = max(1, (model.deg - 1) * K)
    s = _unit_nodes(Kq)
    vals = eval_matrix_float(K, s) @ pc
    ks = model.kernels(vals, sol.N)
    W = interp_values_float(Kq)
    return [time_average_float(W @ k) for k in ks]


def relax(problem, u0, t_span, N, steps=2000):
    """Plain ETDRK4 run used to move initial data onto an attractor."""
    model = SpectralModel(problem, N)
    u = _initial_mid(u0, problem.symmetry, N)
    u = etdrk4(model, u, t_span, steps)
    if problem.symmetry != "none":
        u = _clean_symmetry(u, problem.symmetry)
    return u
