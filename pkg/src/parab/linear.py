"""Piecewise-constant linear operators L = Q Lambda Q^-1 and their propagators.

Subdomains are numbered 1..M; ``grid[m-1], grid[m]`` bound subdomain m.
Q and Lambda are plain floats (so L is defined exactly by them); only the
inverse of Q needs a rigorous enclosure.
"""

import logging

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import DiagonalizationError, UsageError
from .interval import CInterval, Interval, as_interval, iv_matmul, up_add, up_div, up_mul
from .sequences import column_norms, mode_indices, mode_weights
from .solver import SpectralModel

log = logging.getLogger(__name__)


def weighted_opnorm_upper(block_abs_hi, sym, nu, N):
    """Upper bound of the l1_nu norm of a finite block given entrywise magnitude bounds."""
    n = mode_indices(sym, N)
    cols = column_norms(Interval(block_abs_hi), sym, n, n, nu)
    return float(np.max(cols.hi)) if cols.size else 0.0


class DomainLinearOp:
    """L on one subdomain: finite block Q Lambda Q^-1 on |n| <= N_L, diagonal beyond."""

    def __init__(self, J, sym, nu, N_L, Q, lam, Qinv, tail_v0, domain_len, block=None,
                 perturbed=False):
        self.J = int(J)
        self.sym = sym
        self.nu = float(nu)
        self.N_L = int(N_L)
        self.Q = np.asarray(Q, dtype=complex)
        self.lam = np.asarray(lam, dtype=complex)
        self.Qinv = Qinv
        self.tail_v0 = [complex(v) for v in tail_v0]
        self.domain_len = float(domain_len)
        self.block = block
        self.perturbed = perturbed
        self.n = mode_indices(sym, N_L)
        self._re_coeffs = self._tail_re_coefficients()
        self.n_star = self._certified_monotone_index()

    @property
    def Q_iv(self):
        return CInterval.point(self.Q)

    @property
    def Lambda_fin(self):
        return CInterval.point(self.lam)

    @property
    def infinite(self):
        return np.isinf(self.domain_len)

    def Q_abs_hi(self):
        return np.abs(self.Q) * (1 + 4e-16)

    def Qinv_abs_hi(self):
        return self.Qinv.mag()

    # tail --------------------------------------------------------------
    def _tail_re_coefficients(self):
        """a_j with Re lambda_n = -n^(2J) + sum_j a_j n^j (exact, since i^j is a unit)."""
        out = []
        for j, v in enumerate(self.tail_v0):
            # Re((i n)^j v) = n^j Re(i^j v)
            w = [1, 1j, -1, -1j][j % 4] * v
            out.append(w.real)
        return out

    def _certified_monotone_index(self):
        # p'(x) = -2J x^(2J-1) + sum j a_j x^(j-1) < 0 once 2J x > sum j |a_j| (x >= 1)
        s = 0.0
        for j, a in enumerate(self._re_coeffs):
            s = up_add(s, up_mul(j, abs(a)))
        bound = float(up_div(s, 2 * self.J))
        return max(self.N_L + 1, int(np.floor(bound)) + 1)

    def tail_lambda(self, n):
        """Enclosure of lambda_n = -n^(2J) + sum_j (in)^j vbar_0^(j) for integer array n."""
        n = np.atleast_1d(np.asarray(n))
        nn = Interval(n.astype(float))
        re = -(nn ** (2 * self.J))
        im = Interval.zeros(n.shape)
        for j, v in enumerate(self.tail_v0):
            if v == 0:
                continue
            w = CInterval.point(np.array([1, 1j, -1, -1j][j % 4] * v))
            pj = nn ** j if j else Interval(np.ones(n.shape))
            term = CInterval(pj * w.re, pj * w.im)
            re = re + term.re
            im = im + term.im
        return CInterval(re, im)

    def tail_re(self, n):
        return self.tail_lambda(n).re

    def tail_scan(self, N):
        """Integers N < |n| <= max(n_star, N + 1) (both signs when unsymmetric)."""
        stop = max(N + 1, self.n_star)
        n = np.arange(N + 1, stop + 1)
        if self.sym == "none":
            n = np.concatenate([n, -n])
        return n

    def sup_tail_re(self, N):
        """Enclosure of sup_{|n| > N} Re lambda_n (finite scan up to the monotone index)."""
        v = self.tail_re(self.tail_scan(N))
        return Interval(np.max(v.lo), np.max(v.hi))

    # finite part ----------------------------------------------------------
    def exp_lam(self, t):
        """Enclosure of e^(t Lambda_fin) for a (finite) time t."""
        t = as_interval(t)
        return (self.Lambda_fin * CInterval(t, Interval(0.0))).exp()

    def apply_exp(self, theta, t):
        """e^(tL) applied to a one-sided interval vector on |n| <= N_theta."""
        theta = CInterval.point(theta) if not isinstance(theta, CInterval) else theta
        k = len(self.n)
        head = theta[:k]
        out = iv_matmul(self.Q_iv, (self.exp_lam(t) * iv_matmul(self.Qinv, head.reshape(-1, 1)).reshape(-1)).reshape(-1, 1)).reshape(-1)
        if theta.shape[0] > k:
            n = mode_indices(self.sym, _order(self.sym, theta.shape[0]))[k:]
            tl = self.tail_lambda(n) * CInterval(as_interval(t), Interval(0.0))
            rest = theta[k:] * tl.exp()
            out = _concat(out, rest)
        return out

    def __repr__(self):
        return (f"DomainLinearOp(N_L={self.N_L}, sym={self.sym}, len={self.domain_len:g}, "
                f"n*={self.n_star})")


def _order(sym, length):
    return length - 1 if sym == "even" else length if sym == "odd" else (length - 1) // 2


def _concat(a, b):
    return CInterval(Interval(np.concatenate([a.re.lo, b.re.lo]), np.concatenate([a.re.hi, b.re.hi])),
                     Interval(np.concatenate([a.im.lo, b.im.lo]), np.concatenate([a.im.hi, b.im.hi])))


# construction ------------------------------------------------------------

def _ordered_eig(A, n):
    """Eigendecomposition with eigenvector k assigned to the mode it is concentrated on."""
    lam, V = scipy.linalg.eig(A)
    _, perm = linear_sum_assignment(-np.abs(V))
    # perm[row] = column of V assigned to mode `row`
    V = V[:, perm]
    lam = lam[perm]
    piv = np.diag(V).copy()
    piv[np.abs(piv) == 0] = 1.0
    V = V / piv[None, :]
    return lam, V


def enclose_inverse(Q, sym, nu, N):
    """Rigorous entrywise enclosure of Q^-1 (complex float Q) via R + E R + remainder.

    With E = I - R Q and kappa = ||E|| < 1 in the l1_nu norm,
    Q^-1 = R + E R + E^2 (I - E)^-1 R, and the last term has norm at most
    kappa^2 ||R|| / (1 - kappa).  A column norm bound c turns into the entry
    bound |S_nk| <= c w_k / w_n.
    """
    k = Q.shape[0]
    R = np.linalg.inv(Q)
    Qi = CInterval.point(Q)
    Ri = CInterval.point(R)
    E = CInterval.point(np.eye(k, dtype=complex)) - iv_matmul(Ri, Qi)
    n = mode_indices(sym, N)
    w = mode_weights(sym, n, nu)
    kappa = weighted_opnorm_upper(E.mag(), sym, nu, N)
    if not kappa < 1:
        raise DiagonalizationError(f"inverse enclosure failed (||I - RQ|| = {kappa:.3g})")
    normR = weighted_opnorm_upper(np.abs(R) * (1 + 4e-16), sym, nu, N)
    gap = float(np.nextafter(1.0 - kappa, 0.0))
    rem = float(up_div(up_mul(up_mul(kappa, kappa), normR), gap))
    ER = iv_matmul(E, Ri)
    core = Ri + ER
    rad = up_mul(rem, up_div(w.hi[None, :], w.lo[:, None]))
    ball = Interval(-rad, rad)
    return CInterval(core.re + ball, core.im + ball), kappa


def _diagonalize(A, sym, nu, N):
    n = mode_indices(sym, N)
    lam, Q = _ordered_eig(A, n)
    if not np.all(np.isfinite(Q)) or not np.all(np.isfinite(lam)):
        raise DiagonalizationError("non-finite eigendecomposition")
    Qinv, kappa = enclose_inverse(Q, sym, nu, N)
    return lam, Q, Qinv


def diagonalize_block(A, sym, nu, N, retries=3, seed=0, max_qnorm=1e6):
    """(lam, Q, Qinv, perturbed) for a finite block A on the one-sided basis of order N.

    If the plain diagonalization fails, or ||Q^-1|| exceeds ``max_qnorm``, a
    random symmetric perturbation of relative size 1e-8 is diagonalized
    instead (up to ``retries`` times); the candidate with the smallest
    ||Q^-1|| wins, the unperturbed one included.
    """
    def qnorm(res):
        return weighted_opnorm_upper(res[2].mag(), sym, nu, N)

    best, perturbed = None, False
    try:
        best = _diagonalize(A, sym, nu, N)
    except (DiagonalizationError, np.linalg.LinAlgError) as exc:
        log.info("diagonalization failed (%s); trying perturbations", exc)
    if best is None or qnorm(best) > max_qnorm:
        rng = np.random.default_rng(seed)
        scale = 1e-8 * max(1.0, np.abs(A).max())
        for _ in range(retries):
            P = rng.standard_normal(A.shape)
            P = (P + P.T) / 2
            try:
                cand = _diagonalize(A + scale * P, sym, nu, N)
            except (DiagonalizationError, np.linalg.LinAlgError):
                continue
            if best is None or qnorm(cand) < qnorm(best):
                best, perturbed = cand, True
    if best is None:
        raise DiagonalizationError("could not diagonalize the linear block")
    lam, Q, Qinv = best
    if sym != "none":
        lam = _clean_conjugates(lam, A)
    return lam, Q, Qinv, perturbed


def build_linear_op(problem, kernels, N_L, nu, domain_len, retries=3, seed=0):
    """L^(m) from the kernel averages of subdomain m (two-sided float arrays, |n| <= N_u)."""
    N_L = int(N_L)
    Nu = (len(kernels[0]) - 1) // 2
    if N_L > Nu:
        raise UsageError(f"N_L = {N_L} exceeds the kernel order {Nu}")
    model = SpectralModel(problem, N_L)
    ks = [np.asarray(k, dtype=complex) for k in kernels]
    A = model.block_from_kernels(ks)
    tail_v0 = [k[Nu] if j in model.active else 0.0 for j, k in enumerate(ks)]
    lam, Q, Qinv, perturbed = diagonalize_block(A, problem.symmetry, nu, N_L, retries, seed)
    return DomainLinearOp(problem.J, problem.symmetry, nu, N_L, Q, lam, Qinv, tail_v0, domain_len,
                          A, perturbed)


def _clean_conjugates(lam, A):
    # eigenvalues of a real block that are real up to roundoff are stored as real
    if np.all(A.imag == 0):
        small = np.abs(lam.imag) <= 1e-13 * np.maximum(1.0, np.abs(lam.real))
        lam = np.where(small, lam.real + 0j, lam)
    return lam


# propagators -----------------------------------------------------------------

def _delta(grid, j):
    return Interval(grid[j]) - Interval(grid[j - 1])


class PropagatorChain:
    """Finite-block factors of Q^(m)^-1 L^(m,i) Q^(i) in the grouped form.

    P(m, i) = G_m E_(m-1) G_(m-1) ... E_(i+1) G_(i+1) with
    G_j = Q^(j)^-1 Q^(j-1) and E_j = exp(delta_j Lambda^(j)); P(m, m-1) = G_m.
    """

    def __init__(self, ops, grid):
        if len(ops) != len(grid) - 1:
            raise UsageError("need one operator per subdomain")
        if len({op.N_L for op in ops}) > 1:
            raise UsageError("all subdomains must share N_L")
        self.ops = ops
        self.grid = [float(t) for t in grid]
        self.M = len(ops)
        self._G = {}
        self._E = {}

    def delta(self, j):
        return _delta(self.grid, j)

    def G(self, j):
        """Q^(j)^-1 Q^(j-1) for 2 <= j <= M."""
        if j not in self._G:
            self._G[j] = iv_matmul(self.ops[j - 1].Qinv, self.ops[j - 2].Q_iv)
        return self._G[j]

    def E(self, j):
        if j not in self._E:
            self._E[j] = self.ops[j - 1].exp_lam(self.delta(j))
        return self._E[j]

    def iter_from(self, i):
        """Yield (m, P(m, i)) for m = i+1..M."""
        P = None
        for m in range(i + 1, self.M + 1):
            if P is None:
                P = self.G(m)
            else:
                P = iv_matmul(self.G(m), self.E(m - 1).reshape(-1, 1) * P)
            yield m, P

    def conjugated(self, m, i):
        """Q^(m)^-1 L^(m,i) Q^(i) on the finite block (identity when i = m)."""
        if i == m:
            k = len(self.ops[m - 1].n)
            return CInterval.point(np.eye(k, dtype=complex))
        for mm, P in self.iter_from(i):
            if mm == m:
                return P
        raise UsageError("need i <= m")

    def chain(self, m, l):
        """Finite block of L^(m,l) = e^(delta_(m-1) L^(m-1)) ... e^(delta_(l+1) L^(l+1)), grouped."""
        if l >= m:
            raise UsageError("need l < m")
        k = len(self.ops[0].n)
        if l == m - 1:
            return CInterval.point(np.eye(k, dtype=complex))
        # Q^(m-1) E_(m-1) [G_(m-1) E_(m-2) ... G_(l+2)] E_(l+1) Q^(l+1)^-1
        left = self.ops[m - 2].Q_iv * self.E(m - 1).reshape(1, -1)
        right = self.ops[l].Qinv
        if m - 1 > l + 1:
            inner = self.conjugated(m - 1, l + 1) * self.E(l + 1).reshape(1, -1)
            left = iv_matmul(left, inner)
        return iv_matmul(left, right)

    def chain_ungrouped(self, m, l):
        """Same product as :meth:`chain`, multiplying full exponentials e^(delta L) one by one."""
        k = len(self.ops[0].n)
        out = CInterval.point(np.eye(k, dtype=complex))
        for j in range(l + 1, m):
            op = self.ops[j - 1]
            expL = iv_matmul(op.Q_iv * self.E(j).reshape(1, -1), op.Qinv)
            out = iv_matmul(expL, out)
        return out


def propagator_chain(ops, grid):
    return PropagatorChain(ops, grid)


def mu_bound(ops, grid, m, l, N):
    """exp(sup_{|n|>N} [delta_m Re(lambda^(m)_n)^+ + sum_{j=l+1}^{m-1} delta_j Re lambda^(j)_n]).

    Returns 1 when l == m.  The sup is a finite scan: beyond the largest
    certified monotone index every summand is nonincreasing in |n|.
    """
    if l == m:
        return Interval(1.0)
    if l > m or m < 1:
        raise UsageError("need l <= m")
    involved = [ops[j - 1] for j in range(l + 1, m + 1)]
    if any(N < op.N_L for op in involved):
        raise UsageError("N must be at least N_L")
    stop = max([N + 1] + [op.n_star for op in involved])
    n = np.arange(N + 1, stop + 1)
    if ops[m - 1].sym == "none":
        n = np.concatenate([n, -n])
    opm = ops[m - 1]
    re_m = opm.tail_re(n)
    pos = Interval(np.maximum(re_m.lo, 0.0), np.maximum(re_m.hi, 0.0))
    if opm.infinite:
        if np.any(pos.hi > 0):
            return Interval(np.inf)
        total = Interval.zeros(n.shape)
    else:
        total = pos * _delta(grid, m)
    for j in range(l + 1, m):
        total = total + ops[j - 1].tail_re(n) * _delta(grid, j)
    s = Interval(np.max(total.lo), np.max(total.hi))
    return s.exp()
