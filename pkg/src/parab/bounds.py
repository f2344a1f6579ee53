"""Rigorous Y, Z and W bounds for the multi-domain fixed-point operator.

Subdomains are numbered 1..M.  The defect on domain m is evaluated in the
residual form

    T(u)(t) - u(t) = e^(hL) e_(m-1) + int_0^h e^((h-s)L) rho(s) ds,

with rho = F(u) - u' the residual of the approximate solution, h the local
time and e_(m-1) the mismatch between the propagated state and the start of
piece m.  This is an exact rewriting of the defect whose ingredients are all
small, so the enclosures stay narrow along the time grid.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import lgamma, log

import numpy as np

from .chebyshev import STSeq, c0_upper, cheb_derivative, phi1_real_upper
from .errors import BoundFailure, StabilityError, UsageError
from .interval import CInterval, Interval, as_interval, iv_matmul, up_add, up_div, up_matmul, up_mul, up_sum
from .linear import propagator_chain
from .problem import rhs_F
from .sequences import (
    FourierSeq, Poly, apply_poly, concat, conv_matrix, derivative_factor, mode_indices, mode_weights,
    pad_last, to_two_sided,
)

log_ = logging.getLogger(__name__)

# |delta * lambda| up to which the modal flow is expanded as a series in the
# Chebyshev integration operator; stiffer modes use the exponential-integral bound
SERIES_LIMIT = 12.0
_SERIES_TOL = 1e-20


# scalar helpers -----------------------------------------------------------

def exp_integral_upper(x_hi):
    """Upper bound of (e^x - 1)/x (1 at x = 0), an increasing function, at x = x_hi."""
    x = np.atleast_1d(np.asarray(x_hi, dtype=float))
    out = np.ones(x.shape)
    small = np.abs(x) < 1e-3
    pos = (x > 0) & ~small
    neg = (x < 0) & ~small
    if pos.any():
        out[pos] = phi1_real_upper(x[pos])
    if neg.any():
        xi = Interval(x[neg])
        out[neg] = ((1.0 - xi.exp()) / (-xi)).hi
    if small.any():
        # sum_k x^k/(k+1)!: cubic tail at most |x|^3/24 * e^|x| < |x|^3/23
        xs = Interval(x[small])
        tail = (xs.abs() ** 3) / 23.0
        out[small] = (1.0 + xs * 0.5 + xs * xs / 6.0 + tail).hi
    return out


def btilde_upper(re_hi, delta):
    """sup_t int_0^t |e^((t-s) lam)| ds over [0, delta], from an upper bound of Re lam.

    For an infinite step this is 1/|Re lam| and needs Re lam < 0.
    """
    re_hi = np.asarray(re_hi, dtype=float)
    if _is_inf(delta):
        if np.any(re_hi >= 0):
            raise StabilityError("eigenvalue with nonnegative real part on the infinite step")
        return up_div(1.0, -re_hi)
    d = as_interval(delta)
    x = (Interval(re_hi) * d).hi
    return up_mul(d.hi, exp_integral_upper(x))


def exp_pos_upper(re_hi, delta):
    """Upper bound of exp(delta * max(Re lam, 0)) (1 on the infinite step)."""
    re_hi = np.asarray(re_hi, dtype=float)
    if _is_inf(delta):
        return np.ones(re_hi.shape)
    x = (Interval(np.maximum(re_hi, 0.0)) * as_interval(delta)).hi
    return Interval(x).exp().hi


def _is_inf(delta):
    if isinstance(delta, Interval):
        return bool(np.isinf(delta.hi).any())
    return bool(np.isinf(delta))


def _cdisk(rad):
    rad = np.asarray(rad, dtype=float)
    return CInterval(Interval(-rad, rad), Interval(-rad, rad))


def _weights_hi(sym, n, nu):
    return mode_weights(sym, n, nu).hi


def _weights_lo(sym, n, nu):
    return mode_weights(sym, n, nu).lo


def colnorm_upper(X, sym, rows, cols, nu):
    """max_k sum_n w_n X_nk / w_k for a nonnegative float matrix X (upper bound)."""
    if X.size == 0:
        return 0.0
    wr = _weights_hi(sym, rows, nu)
    wc = _weights_lo(sym, cols, nu)
    s = up_matmul(wr[None, :], X)[0]
    return float(np.max(up_div(s, wc)))


def norm_upper(vec_mag, sym, n, nu):
    return float(up_sum(up_mul(_weights_hi(sym, n, nu), vec_mag)))


# Chebyshev integration on [0, 1] --------------------------------------------

def integrate_unit(a):
    """Coefficients of eta -> int_0^eta p, for p = sum a_k T_k(2 eta - 1) (axis 0)."""
    D = a.shape[0] - 1
    rest = a.shape[1:]
    ap = concat([a, CInterval.zeros((2,) + rest)], axis=0)
    k = np.arange(1, D + 2)
    lower = ap[k - 1]
    upper = ap[k + 1]
    # int T_0 = T_1, int T_k = T_(k+1)/(2(k+1)) - T_(k-1)/(2(k-1)): b_k = (c_(k-1) a_(k-1) - a_(k+1))/(2k)
    lower = CInterval(lower.re * _first_double(D + 1, rest), lower.im * _first_double(D + 1, rest))
    b = (lower - upper) / Interval((2.0 * k).reshape((-1,) + (1,) * len(rest)))
    sign = ((-1.0) ** k).reshape((-1,) + (1,) * len(rest))
    b0 = -((b * sign).sum(axis=0))
    out = concat([b0.reshape((1,) + rest), b], axis=0)
    return out * 0.5


def _first_double(n, rest):
    f = np.ones((n,) + (1,) * len(rest))
    f[0] = 2.0
    return Interval(f)


def _series_order(zmax):
    if zmax == 0:
        return 0
    R = 1
    while (R + 1) * log(zmax) + zmax - lgamma(R + 2) > log(_SERIES_TOL):
        R += 1
    return R


def _pad_rows(a, n):
    if a.shape[0] >= n:
        return a
    return concat([a, CInterval.zeros((n - a.shape[0],) + a.shape[1:])], axis=0)


def _integrate_unit_float(a):
    D = a.shape[0] - 1
    ap = np.concatenate([a, np.zeros((2,) + a.shape[1:], dtype=a.dtype)])
    k = np.arange(1, D + 2).reshape((-1,) + (1,) * (a.ndim - 1))
    lower = ap[:D + 1].copy()
    lower[0] *= 2
    b = (lower - ap[2:D + 3]) / (2.0 * k)
    b0 = -np.sum(b * (-1.0) ** k, axis=0)
    return 0.5 * np.concatenate([b0[None], b])


def _series_flow(c, q, z, delta, zmax):
    """Non-stiff modes: float series solution plus an a-posteriori error bound.

    f = sum_r z^r J^r v is summed in floating point; the exact flow differs from
    it by e with e' = z e + r, so |e| <= |e(0)| e^(Re z)^+ + ||r|| (e^Re z - 1)/Re z.
    """
    d = as_interval(delta)
    R = _series_order(zmax)
    zm = z.mid()
    v = float(d.mid()) * _integrate_unit_float(q.mid())
    v[0] += c.mid()
    f = v
    for _ in range(R):
        Jf = _integrate_unit_float(f)
        vv = np.zeros_like(Jf)
        vv[:v.shape[0]] = v
        f = vv + Jf * zm[None, :]
    # drop coefficients below resolution
    keep = np.nonzero(np.abs(f).max(axis=1) > 1e-300)[0]
    f = f[:keep[-1] + 1] if keep.size else f[:1]
    F = CInterval.point(f)
    dF = cheb_derivative(F, 1.0)
    qd = q * d
    nr = max(F.shape[0], qd.shape[0])
    r = _pad_rows(F * z.reshape(1, -1), nr) - _pad_rows(dF, nr) + _pad_rows(qd, nr)
    rn = c0_upper(r)
    sign = Interval(((-1.0) ** np.arange(F.shape[0])).reshape(-1, 1))
    e0 = (c - (F * sign).sum(axis=0)).mag()
    rez = z.re.hi
    grow = Interval(np.maximum(rez, 0.0)).exp().hi
    g = exp_integral_upper(rez)
    rad = up_add(up_mul(e0, grow), up_mul(rn, g))
    e1 = up_add(up_mul(e0, Interval(rez).exp().hi), up_mul(rn, g))
    return F, rad, F.sum(axis=0) + _cdisk(e1)


def modal_flow(c, q, z, delta):
    """Scalar flows f_k(eta) = e^(eta z_k) c_k + delta int_0^eta e^((eta-u) z_k) q_k(u) du.

    ``c``: CInterval (K,), ``q``: Chebyshev coefficients in eta (D+1, K),
    ``z``: delta * lambda (CInterval (K,)), ``delta``: Interval.
    Returns (poly, rad, end): f_k(eta) lies within poly_k(eta) + disk(rad_k) for
    all eta in [0, 1] (poly is zero for stiff modes) and f_k(1) lies in end_k.
    """
    nmodes = c.shape[0]
    zmag = z.mag()
    series = zmag <= SERIES_LIMIT
    qn = c0_upper(q) if q.shape[0] else np.zeros(nmodes)
    rad = np.zeros(nmodes)
    poly = None
    end = CInterval.zeros((nmodes,))
    # stiff modes: |f| <= |c| e^(Re z)^+ + delta |q| (e^Re z - 1)/Re z
    st = ~series
    if st.any():
        zs = z[st]
        rez_hi = zs.re.hi
        growth = Interval(np.maximum(rez_hi, 0.0)).exp().hi
        forcing = up_mul(up_mul(as_interval(delta).hi, qn[st]), exp_integral_upper(rez_hi))
        rad[st] = up_add(up_mul(c[st].mag(), growth), forcing)
        e_end = zs.exp() * c[st] + _cdisk(forcing)
        end = end.put(np.nonzero(st)[0], e_end)
    if series.any():
        idx = np.nonzero(series)[0]
        poly_s, rad_s, end_s = _series_flow(c[idx], q[:, idx], z[idx], delta, float(np.max(zmag[idx])))
        rad[idx] = rad_s
        end = end.put(idx, end_s)
        poly = CInterval.zeros((poly_s.shape[0], nmodes)).put((slice(None), idx), poly_s)
    if poly is None:
        poly = CInterval.zeros((1, nmodes))
    return poly, rad, end


# per-domain modal frame ------------------------------------------------------

class ModalFrame:
    """Coordinates on |n| <= Nr split into the eigenbasis block of L and diagonal tail modes."""

    def __init__(self, op, Nr):
        self.op = op
        self.sym = op.sym
        self.nu = op.nu
        self.Nr = max(int(Nr), op.N_L)
        self.n = mode_indices(self.sym, self.Nr)
        self.blk = np.abs(self.n) <= op.N_L
        self.tail = ~self.blk
        self.lam_tail = op.tail_lambda(self.n[self.tail]) if self.tail.any() else CInterval.zeros((0,))

    def lam(self):
        return concat([op_lam(self.op), self.lam_tail])

    def to_modal(self, v):
        """v: CInterval (..., nr) physical -> (..., nL + ntail) modal."""
        lead = v.shape[:-1]
        vb = v[..., self.blk].reshape(-1, int(self.blk.sum()))
        cb = iv_matmul(vb, self.op.Qinv.T).reshape(lead + (-1,))
        return concat([cb, v[..., self.tail]], axis=-1)

    def from_modal(self, m):
        nb = int(self.blk.sum())
        lead = m.shape[:-1]
        blk = iv_matmul(m[..., :nb].reshape(-1, nb), self.op.Q_iv.T).reshape(lead + (nb,))
        out = CInterval.zeros(lead + (len(self.n),))
        out = out.put((Ellipsis, np.nonzero(self.blk)[0]), blk)
        return out.put((Ellipsis, np.nonzero(self.tail)[0]), m[..., nb:])

    def sup_norm(self, poly, rad):
        """Upper bound of sup_eta || from_modal(poly(eta) + disk(rad)) ||."""
        nb = int(self.blk.sum())
        Qabs = self.op.Q_abs_hi()
        H = iv_matmul(poly[:, :nb], self.op.Q_iv.T)
        blk_mag = up_add(c0_upper(H), up_matmul(Qabs, rad[:nb][:, None])[:, 0])
        tail_mag = up_add(c0_upper(poly[:, nb:]), rad[nb:])
        total = norm_upper(blk_mag, self.sym, self.n[self.blk], self.nu)
        return float(up_add(total, norm_upper(tail_mag, self.sym, self.n[self.tail], self.nu)))


def op_lam(op):
    return op.Lambda_fin


def _resize(v, sym, n_old, n_new):
    return pad_last(v, sym, n_old, n_new)


def _seq_order(sym, length):
    return length - 1 if sym == "even" else length if sym == "odd" else (length - 1) // 2


# tail tables ---------------------------------------------------------------

class TailTable:
    """Upper bounds of delta_j Re lambda^(j)_n on a common scan range of tail indices.

    The range N_L < |n| <= n_max reaches every certified monotone index, so
    suprema of nonincreasing combinations are attained inside it.
    """

    def __init__(self, ops, grid, n_max):
        self.ops = ops
        self.grid = [float(t) for t in grid]
        N_L = ops[0].N_L
        self.n_max = max([int(n_max), N_L + 1] + [op.n_star for op in ops])
        n = np.arange(N_L + 1, self.n_max + 1)
        if ops[0].sym == "none":
            n = np.concatenate([n, -n])
        self.n = n
        self.re_hi = [op.tail_re(n).hi for op in ops]
        self._mu = {}
        self.R = []      # delta_j Re lambda (upper)
        self.P = []      # delta_j max(Re lambda, 0) (upper)
        for j, op in enumerate(ops, start=1):
            d = self.delta(j)
            if _is_inf(d):
                self.R.append(np.full(n.shape, np.nan))
                self.P.append(np.where(self.re_hi[j - 1] > 0, np.inf, 0.0))
            else:
                self.R.append((Interval(self.re_hi[j - 1]) * d).hi)
                self.P.append((Interval(np.maximum(self.re_hi[j - 1], 0.0)) * d).hi)

    def delta(self, j):
        return as_interval(self.grid[j]) - as_interval(self.grid[j - 1])

    def exponent(self, m, i):
        """Upper bounds of delta_m Re(lambda^(m))^+ + sum_{j=i+1}^{m-1} delta_j Re lambda^(j) per n."""
        acc = self.P[m - 1].copy()
        for j in range(i + 1, m):
            acc = up_add(acc, self.R[j - 1])
        return acc

    def mu(self, m, i, N=None):
        """Upper bound of mu^(m,i)_N (mu^(m,m) = 1)."""
        if i == m:
            return 1.0
        N = self.ops[0].N_L if N is None else N
        key = (m, i, N)
        if key not in self._mu:
            self._mu[key] = self._mu_value(m, i, N)
        return self._mu[key]

    def _mu_value(self, m, i, N):
        mask = np.abs(self.n) > N
        if not mask.any():
            raise UsageError("scan range does not reach beyond N")
        e = self.exponent(m, i)[mask]
        return float(Interval(np.max(e)).exp().hi)

    def growth(self, m, i, n_rows):
        """exp(...) factors of b^(m,i)_n for explicit tail rows (|n| within the scan range)."""
        if i == m:
            return np.ones(len(n_rows))
        e = self.exponent(m, i)
        lookup = {int(k): x for k, x in zip(self.n, e)}
        vals = np.array([lookup[int(k)] for k in n_rows])
        return Interval(vals).exp().hi


# chi -----------------------------------------------------------------------

def chi_bound(op, j, delta=None, shift=0.0, n_cap=1 << 22):
    """Upper bound of sup_{|n|>N_L} |n|^j btilde_n (btilde with Re lambda replaced by Re lambda - shift).

    Finite scan, then the decreasing majorant n^j / (n^2J - sum_i |a_i| n^i - |shift|)
    beyond the scan.  ``delta`` defaults to the operator's domain length.
    """
    delta = op.domain_len if delta is None else delta
    J = op.J
    if j >= 2 * J:
        raise UsageError("chi needs j < 2J")
    a_abs = np.abs(np.array(op._re_coeffs, dtype=float))
    best = 0.0
    start = op.N_L + 1
    stop = max(op.n_star, start)
    while True:
        n = np.arange(start, stop + 1)
        nn = n if op.sym != "none" else np.concatenate([n, -n])
        re = op.tail_re(nn) - shift
        bt = btilde_upper(re.hi, delta)
        nj = (Interval(np.abs(nn).astype(float)) ** j).hi if j else np.ones(nn.shape)
        best = max(best, float(np.max(up_mul(nj, bt))))
        n0 = stop + 1
        # majorant at n0
        n0i = Interval(float(n0))
        den = n0i ** (2 * J)
        for i, a in enumerate(a_abs):
            if a:
                den = den - (n0i ** i) * a
        den = den - abs(shift)
        if den.lo > 0:
            maj = ((n0i ** j) / den).hi if j else (Interval(1.0) / den).hi
            # majorant is decreasing for j < 2J once the denominator is positive
            if maj <= best or n0 >= n_cap:
                return float(max(best, maj))
        elif n0 >= n_cap:
            raise BoundFailure("chi scan did not terminate")
        start, stop = n0, min(2 * stop, n_cap)


# Gamma and beta -------------------------------------------------------------

@dataclass
class DomainIngredients:
    index: int
    op: object
    delta: object
    bt_blk: np.ndarray           # btilde on the eigenvalues of the block
    Gamma: np.ndarray            # entrywise C0 bounds, rows |n| <= N_row, cols |k| <= N_col
    rows: np.ndarray
    cols: np.ndarray
    beta_norms: list             # ||beta^(j)|| per order j
    chi: list                    # chi^(j) per order j < 2J
    ubar_norm: float
    Nbar: int
    Qinv_abs: np.ndarray = field(repr=False, default=None)
    shift: float = 0.0           # a in Re lambda - a (spectral gap scans)

    def shifted(self, a):
        """Ingredients of the infinite step with every Re lambda replaced by Re lambda - a."""
        if not _is_inf(self.delta):
            raise UsageError("only the infinite step can be shifted")
        re = (self.op.Lambda_fin.re - a).hi
        bt = btilde_upper(re, np.inf)
        chi = [chi_bound(self.op, j, np.inf, shift=a) for j in range(len(self.chi))]
        return replace(self, bt_blk=bt, chi=chi, shift=float(a))


def kernel_sequences(problem, ubar):
    """g_j'(ubar) as space-time (or Fourier) sequences for active orders."""
    out = {}
    for j, g in enumerate(problem.gs):
        dg = g.derivative()
        if dg.is_zero():
            continue
        out[j] = apply_poly(dg, ubar)
    return out


def _st_coeffs_two_sided(s):
    """Two-sided (K+1, 2N+1) coefficients of an STSeq or FourierSeq."""
    if isinstance(s, STSeq):
        return s.two_sided(), s.N
    c = s.two_sided()
    return c.reshape(1, -1), s.N


def beta_sequences(problem, ubar, vbar0):
    """C0 bounds (two-sided floats) of g_j'(ubar) - vbar0_j and their support radius."""
    ks = kernel_sequences(problem, ubar)
    betas = {}
    Nbar = 0
    for j, k in ks.items():
        c, N = _st_coeffs_two_sided(k)
        c = c.put((0, N), c[0, N] - complex(vbar0[j]))
        b = c0_upper(c)
        betas[j] = (b, N)
        nz = np.nonzero(b)[0]
        if nz.size:
            Nbar = max(Nbar, int(np.max(np.abs(nz - N))))
    return betas, Nbar, ks


def beta_norm(b, N, nu):
    n = np.arange(-N, N + 1)
    w = Interval(float(nu)) ** 1
    wn = mode_weights("none", n, nu).hi
    return float(up_sum(up_mul(wn, b)))


def gamma_op(problem, ubar, op, Nbar, kernels=None):
    """Entrywise C0 bounds of Q^-1 D gamma(ubar) on columns |k| <= Nbar + N_L.

    D gamma(u) h = sum_j D^j(g_j'(u) h) - (L - L_0) h with L_0 = diag(-n^2J).
    Rows |n| <= N_L are mapped through Q^-1 (identity beyond).  Returns
    (Gamma, rows, cols) with one-sided indices of the problem symmetry.
    """
    sym = op.sym
    N_L = op.N_L
    Ncol = Nbar + N_L
    Nrow = Ncol + Nbar
    rows = mode_indices(sym, Nrow)
    cols = mode_indices(sym, Ncol)
    ks = kernel_sequences(problem, ubar) if kernels is None else kernels
    nt = 1
    for k in ks.values():
        if isinstance(k, STSeq):
            nt = max(nt, k.K + 1)
    mats = [CInterval.zeros((len(rows), len(cols))) for _ in range(nt)]
    none_rows = np.arange(-Nrow, Nrow + 1)
    pick = np.searchsorted(none_rows, rows)
    for j, k in ks.items():
        c, N = _st_coeffs_two_sided(k)
        fac = derivative_factor(rows, j).reshape(-1, 1)
        for t in range(c.shape[0]):
            A, _ = conv_matrix(c[t], "none", sym, Nrow, Ncol)
            mats[t] = mats[t] + A[pick] * fac
    # subtract L - L_0 (time independent)
    blk_r = np.abs(rows) <= N_L
    blk_c = np.abs(cols) <= N_L
    LQ = iv_matmul(op.Q_iv * op.Lambda_fin.reshape(1, -1), op.Qinv)
    n2J = Interval(np.abs(op.n).astype(float)) ** (2 * op.J)
    LQ = LQ + CInterval(Interval(np.diag(n2J.lo), np.diag(n2J.hi)))
    ri = np.nonzero(blk_r)[0]
    ci = np.nonzero(blk_c)[0]
    sub = mats[0][ri[:, None], ci[None, :]] - LQ
    mats[0] = mats[0].put((ri[:, None], ci[None, :]), sub)
    tail_c = np.nonzero(~blk_c)[0]
    if tail_c.size:
        nt_ = cols[tail_c]
        shift = op.tail_lambda(nt_) + CInterval(Interval(np.abs(nt_).astype(float)) ** (2 * op.J))
        rpos = np.searchsorted(rows, nt_) if sym != "none" else np.searchsorted(rows, nt_)
        diag = mats[0][rpos, tail_c] - shift
        mats[0] = mats[0].put((rpos, tail_c), diag)
    # Q^-1 on the block rows
    G = np.zeros((len(rows), len(cols)))
    for M_t in mats:
        top = iv_matmul(op.Qinv, M_t[ri])
        mag = M_t.mag()
        mag[ri] = top.mag()
        G = up_add(G, mag)
    return G, rows, cols


def domain_ingredients(problem, ubar, op, index, delta, vbar0, ubar_norm):
    """Everything Z and W need about domain ``index``."""
    betas, Nbar, ks = beta_sequences(problem, ubar, vbar0)
    G, rows, cols = gamma_op(problem, ubar, op, Nbar, ks)
    re_hi = op.Lambda_fin.re.hi
    bt = btilde_upper(re_hi, delta)
    beta_norms = [0.0] * (2 * problem.J)
    chi = [0.0] * (2 * problem.J)
    for j, (b, N) in betas.items():
        beta_norms[j] = beta_norm(b, N, op.nu)
    for j in range(2 * problem.J):
        chi[j] = chi_bound(op, j, delta)
    return DomainIngredients(index, op, delta, bt, G, rows, cols, beta_norms, chi, ubar_norm, Nbar,
                             op.Qinv.mag())


# Y ------------------------------------------------------------------------------

def piece_st(sol, m):
    """Space-time interval sequence of piece m (1-based)."""
    t0, t1 = sol.domain(m - 1)
    return STSeq.from_array(sol.pieces[m - 1], sol.nu, sol.sym, (t0, t1))


def residual_st(problem, sol, m):
    """rho = F(u) - u' on finite piece m as an STSeq."""
    u = piece_st(sol, m)
    t0, t1 = sol.domain(m - 1)
    F = rhs_F(problem, u)
    du = STSeq(cheb_derivative(u.coeffs, as_interval(t1) - t0), u.nu, u.sym, u.domain)
    return F - du


def _state(sol, m, where):
    pc = CInterval.point(sol.pieces[m - 1])
    K = pc.shape[0] - 1
    if K == 0 or where == "end":
        return pc.sum(axis=0)
    sign = Interval(((-1.0) ** np.arange(K + 1)).reshape(-1, 1))
    return (pc * sign).sum(axis=0)


def initial_mismatch(sol, Nr):
    """Pi_{<=N_u} u_in - ubar(tau_0) and the extra tail mass beyond N_u."""
    fin = sol.initial
    sym = sol.sym
    Nu = sol.N
    extra = 0.0
    c = fin.coeffs
    if fin.N > Nu:
        keep = len(mode_indices(sym, Nu))
        n_hi = fin.indices[keep:]
        extra = norm_upper(c[keep:].mag(), sym, n_hi, sol.nu)
        c = c[:keep]
    c = pad_last(c, sym, min(fin.N, Nu), Nu)
    e = c - _state(sol, 1, "start")
    return pad_last(e, sym, Nu, Nr), extra


def y_bound(problem, sol, ops, m, c, eps_term, Nr):
    """Y^(m) on a finite domain and the modal defect at its right end.

    ``c`` holds theta^(m-1) - ubar^(m)(tau_(m-1)) in the modal coordinates of
    domain m, ``eps_term`` the enclosed mu^(m,0) eps_in contribution.
    """
    op = ops[m - 1]
    frame = ModalFrame(op, Nr)
    t0, t1 = sol.domain(m - 1)
    delta = as_interval(t1) - t0
    rho = residual_st(problem, sol, m)
    rho_c = pad_last(rho.coeffs, rho.sym if rho.sym == sol.sym else sol.sym, rho.N, frame.Nr) \
        if rho.sym == sol.sym else _to_sym(rho, sol.sym, frame.Nr)
    q = frame.to_modal(rho_c)
    z = frame.lam() * CInterval(delta, Interval(0.0))
    poly, rad, end = modal_flow(c, q, z, delta)
    Y = up_add(frame.sup_norm(poly, rad), eps_term)
    return float(Y), end


def _to_sym(s, sym, N):
    if s.sym == sym:
        return pad_last(s.coeffs, sym, s.N, N)
    two = s.two_sided()
    n = np.arange(-s.N, s.N + 1)
    keep = np.isin(n, mode_indices(sym, s.N))
    return pad_last(two[:, keep], sym, s.N, N)


def next_mismatch(sol, ops, chain, m, end, Nr):
    """Modal mismatch entering domain m + 1: the defect at tau_m plus the jump of ubar.

    The defect is carried over by the enclosed change of basis
    Q^(m+1)^-1 Q^(m) (identity on the tail), which avoids the wrapping of a
    round trip through Fourier coordinates.
    """
    nb = len(ops[m].n)
    G = chain.G(m + 1)
    blk = iv_matmul(G, end[:nb].reshape(-1, 1)).reshape(-1)
    moved = concat([blk, end[nb:]])
    jump = _state(sol, m, "end") - _state(sol, m + 1, "start")
    return moved + ModalFrame(ops[m], Nr).to_modal(pad_last(jump, sol.sym, sol.N, Nr))


def infinite_bounds_y(problem, sol, op, c, eps_term, Nr):
    """(Y_inf, Y_stat, qnorm) on the infinite step.

    With a = (theta - ubar) + L^-1 F(ubar):
    Y_inf = || |Q||Q^-1 a| || + || L^-1 F(ubar) ||, Y_stat = || L^-1 F(ubar) ||.
    """
    frame = ModalFrame(op, Nr)
    lam = frame.lam()
    if np.any(lam.re.hi >= 0):
        raise StabilityError("the linearization on the infinite step is not strictly stable")
    if op.sup_tail_re(frame.Nr).hi >= 0:
        raise StabilityError("tail eigenvalues are not strictly stable")
    ubar = FourierSeq(CInterval.point(sol.pieces[-1][0]), sol.nu, sol.sym)
    F = rhs_F(problem, ubar)
    Fc = pad_last(F.coeffs, sol.sym, F.N, frame.Nr) if F.sym == sol.sym else _to_sym(
        STSeq(F.coeffs.reshape(1, -1), sol.nu, F.sym, (0.0, 1.0)), sol.sym, frame.Nr)[0]
    Fm = frame.to_modal(Fc)
    LinvF_modal = Fm / lam
    a_modal = c + LinvF_modal
    nb = int(frame.blk.sum())
    Qabs = op.Q_abs_hi()
    amag = a_modal.mag()
    blk = up_matmul(Qabs, amag[:nb][:, None])[:, 0]
    first = up_add(norm_upper(blk, frame.sym, frame.n[frame.blk], frame.nu),
                   norm_upper(amag[nb:], frame.sym, frame.n[frame.tail], frame.nu))
    LinvF = frame.from_modal(LinvF_modal)
    stat = norm_upper(LinvF.mag(), frame.sym, frame.n, frame.nu)
    qq = up_matmul(Qabs, op.Qinv.mag())
    qnorm = max(colnorm_upper(qq, frame.sym, op.n, op.n, frame.nu), 1.0)
    Y = up_add(up_add(first, stat), eps_term)
    return float(Y), float(stat), float(qnorm)


# Z and W ------------------------------------------------------------------------

def _block_factor(m_ing, P, i_is_m):
    """|Q^(m)| diag(exp(delta_m Re lam^+)) |P| as an upper-bound float matrix."""
    op = m_ing.op
    Qabs = op.Q_abs_hi()
    if i_is_m:
        return Qabs
    E = exp_pos_upper(op.Lambda_fin.re.hi, m_ing.delta)
    return up_matmul(Qabs * E[None, :] * (1 + 4e-16), P.mag())


def z_entry(m_ing, i_ing, A, table, m, i):
    """Z^(m)_i from the block factor A = |Q^(m)| e^(...) |P^(m,i)|."""
    G = i_ing.Gamma
    blk_r = np.abs(i_ing.rows) <= i_ing.op.N_L
    top = up_mul(i_ing.bt_blk[:, None], G[blk_r])
    X_blk = up_matmul(A, top)
    tail_rows = i_ing.rows[~blk_r]
    if tail_rows.size:
        re_hi = (i_ing.op.tail_re(tail_rows) - i_ing.shift).hi
        bt = btilde_upper(re_hi, i_ing.delta)
        grow = table.growth(m, i, tail_rows) if table is not None else np.ones(len(tail_rows))
        X_tail = up_mul(up_mul(grow, bt)[:, None], G[~blk_r])
        X = np.vstack([X_blk, X_tail])
        rows = np.concatenate([i_ing.rows[blk_r], tail_rows])
    else:
        X, rows = X_blk, i_ing.rows[blk_r]
    finite = colnorm_upper(X, i_ing.op.sym, rows, i_ing.cols, i_ing.op.nu)
    mu = table.mu(m, i) if table is not None else 1.0
    tail = 0.0
    for bn, ch in zip(i_ing.beta_norms, i_ing.chi):
        tail = up_add(tail, up_mul(bn, ch))
    return float(max(finite, up_mul(mu, tail)))


def w_entry(problem, i_ing, A, table, m, i, r_star_i):
    """W^(m)_ii = sum_j ||B^(m,i) |Q^(i)^-1| |D^j| || |g_j''|(||ubar^(i)|| + r_*^(i))."""
    op = i_ing.op
    rho = up_add(i_ing.ubar_norm, r_star_i)
    mu = table.mu(m, i) if table is not None else 1.0
    total = 0.0
    for j, g in enumerate(problem.gs):
        g2 = g.derivative().derivative()
        if g2.is_zero():
            continue
        amp = float(g2.abs_poly().eval(Interval(rho)).hi)
        dj = (Interval(np.abs(op.n).astype(float)) ** j).hi if j else np.ones(len(op.n))
        V = up_mul(up_mul(i_ing.bt_blk[:, None], i_ing.Qinv_abs), dj[None, :])
        fin = colnorm_upper(up_matmul(A, V), op.sym, op.n, op.n, op.nu)
        nrm = max(fin, up_mul(mu, i_ing.chi[j]))
        total = up_add(total, up_mul(nrm, amp))
    return float(total)


# the full set -----------------------------------------------------------------------

@dataclass
class BoundsSet:
    Y: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    r_star: np.ndarray
    infinite: bool = False
    Y_stat: float = None
    qnorm: float = None
    ingredients: list = field(default_factory=list, repr=False)
    mismatches: list = field(default_factory=list, repr=False)

    @property
    def M(self):
        return len(self.Y)


def compute_bounds(problem, sol, ops, r_star=1e-4, eps_in=None, threads=1):
    """Y, Z, W for every domain (and the infinite step when the grid ends at infinity)."""
    M = sol.M
    if len(ops) != M:
        raise UsageError("need one linear operator per subdomain")
    r_star = np.broadcast_to(np.asarray(r_star, dtype=float), (M,)).copy()
    deg = max(problem.degree(), 1)
    Nr = deg * sol.N
    grid = sol.grid
    chain = propagator_chain(ops, grid)
    eps_in = sol.eps_in if eps_in is None else eps_in
    mis, extra = initial_mismatch(sol, Nr)
    mis = ModalFrame(ops[0], Nr).to_modal(mis)
    eps_total = up_add(eps_in, extra)
    # domain ingredients
    ings = []
    Nbar_all = 0
    for m in range(1, M + 1):
        op = ops[m - 1]
        delta = (as_interval(grid[m]) - grid[m - 1]) if np.isfinite(grid[m]) else np.inf
        if np.isfinite(grid[m]):
            ubar = piece_st(sol, m)
        else:
            ubar = FourierSeq(CInterval.point(sol.pieces[m - 1][0]), sol.nu, sol.sym)
        unorm = float(ubar.norm_X().hi) if isinstance(ubar, STSeq) else float(ubar.norm().hi)
        vbar0 = [op.tail_v0[j] for j in range(2 * problem.J)]
        ing = domain_ingredients(problem, ubar, op, m, delta, vbar0, unorm)
        ings.append(ing)
        Nbar_all = max(Nbar_all, int(np.max(np.abs(ing.rows))) if ing.rows.size else 0)
    table = TailTable(ops, grid, max(Nbar_all, sol.N + 1))
    # Y along the grid
    Y = np.zeros(M)
    mismatches = [mis]
    Y_stat, qnorm = None, None
    for m in range(1, M + 1):
        eps_term = up_mul(table.mu(m, 0, sol.N), eps_total) if eps_total else 0.0
        if np.isfinite(grid[m]):
            Y[m - 1], d_end = y_bound(problem, sol, ops, m, mis, eps_term, Nr)
            if m < M:
                mis = next_mismatch(sol, ops, chain, m, d_end, Nr)
                mismatches.append(mis)
        else:
            Y[m - 1], Y_stat, qnorm = infinite_bounds_y(problem, sol, ops[m - 1], mis, eps_term, Nr)
    # Z and W over the triangular index set, one column per task
    Z = np.zeros((M, M))
    W = np.zeros((M, M))

    def column(i):
        i_ing = ings[i - 1]
        A = _block_factor(i_ing, None, True)
        Z[i - 1, i - 1] = z_entry(i_ing, i_ing, A, table, i, i)
        W[i - 1, i - 1] = w_entry(problem, i_ing, A, table, i, i, r_star[i - 1])
        for m, P in chain.iter_from(i):
            A = _block_factor(ings[m - 1], P, False)
            Z[m - 1, i - 1] = z_entry(ings[m - 1], i_ing, A, table, m, i)
            W[m - 1, i - 1] = w_entry(problem, i_ing, A, table, m, i, r_star[i - 1])

    if threads > 1 and M > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(column, range(1, M + 1)))
    else:
        for i in range(1, M + 1):
            column(i)
    return BoundsSet(Y, Z, W, r_star, bool(np.isinf(grid[-1])), Y_stat, qnorm, ings, mismatches)
