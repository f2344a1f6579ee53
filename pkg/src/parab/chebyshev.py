"""Chebyshev expansions in time and space-time polynomial sequences.

A subdomain [t0, t1] is mapped affinely onto s in [-1, 1].  Interpolation
uses the K+1 Chebyshev extrema ordered by increasing time, so node 0 is
t0 and node K is t1.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BoundFailure, UsageError
from .interval import (
    PI, CInterval, Interval, as_cinterval, as_interval, cbilinear, iv_cos, iv_exp,
    iv_matmul, up_add, up_mul,
)
from .sequences import (
    FourierSeq, concat, mode_indices, mode_weights, pad_last, parity_product,
    to_two_sided, from_two_sided, derivative_factor, derivative_parity,
)


# nodes and transforms --------------------------------------------------------

@lru_cache(maxsize=None)
def _cos_table(K):
    """Enclosures of cos(m*pi/K) for m = 0..2K-1."""
    m = np.arange(2 * K, dtype=float)
    return iv_cos(Interval(m) * PI / float(K))


def cheb_nodes(K):
    """Enclosures of the extrema -cos(j*pi/K), j = 0..K, increasing."""
    if K == 0:
        return Interval(np.array([0.0]))
    c = _cos_table(K)
    return -c[np.arange(K + 1)]


def nodes_in_domain(domain, K):
    t0, t1 = domain
    s = cheb_nodes(K)
    h = (s + 1.0) * (as_interval(t1) - as_interval(t0)) * 0.5
    return h + t0


def node_offsets(domain, K):
    """Enclosures of node - t0 (the local time h used in the Y bound)."""
    t0, t1 = domain
    s = cheb_nodes(K)
    return (s + 1.0) * (as_interval(t1) - as_interval(t0)) * 0.5


@lru_cache(maxsize=None)
def _interp_matrix(K):
    """Interval matrix W with coeffs = W @ values at increasing extrema."""
    if K == 0:
        return Interval(np.array([[1.0]]))
    c = _cos_table(K)
    j = np.arange(K + 1)
    k = np.arange(K + 1)
    table = c[(np.outer(k, j)) % (2 * K)]
    sign = ((-1.0) ** k)[:, None]
    wj = np.where((j == 0) | (j == K), 0.5, 1.0)[None, :]
    wk = np.where((k == 0) | (k == K), 0.5, 1.0)[:, None]
    scale = sign * wj * wk * (2.0 / K)
    return table * scale


# Chebyshev polynomials -----------------------------------------------------------

class ChebPoly:
    """sum_k p_k T_k(s(t)) with coefficient array of shape (K+1, ...)."""

    __slots__ = ("domain", "coeffs")

    def __init__(self, domain, coeffs):
        t0, t1 = float(domain[0]), float(domain[1])
        if not t1 > t0:
            raise UsageError("empty Chebyshev domain")
        self.domain = (t0, t1)
        self.coeffs = as_cinterval(coeffs)

    @property
    def K(self):
        return self.coeffs.shape[0] - 1

    def __call__(self, t):
        return cheb_eval(self, t)


def _to_unit(domain, t):
    t0, t1 = domain
    t = as_interval(t)
    if np.any(t.lo < t0) or np.any(t.hi > t1):
        raise UsageError(f"evaluation point outside the domain [{t0}, {t1}]")
    s = (t * 2.0 - (as_interval(t0) + t1)) / (as_interval(t1) - t0)
    return Interval(np.maximum(s.lo, -1.0), np.minimum(s.hi, 1.0), check=False)


def clenshaw(coeffs, s):
    """Clenshaw recurrence for a coefficient array (K+1, ...) at scalar s."""
    K = coeffs.shape[0] - 1
    if K == 0:
        return coeffs[0]
    b1 = CInterval.zeros(coeffs.shape[1:])
    b2 = CInterval.zeros(coeffs.shape[1:])
    two_s = s * 2.0
    for k in range(K, 0, -1):
        b1, b2 = coeffs[k] + b1 * two_s - b2, b1
    return coeffs[0] + b1 * s - b2


def cheb_eval(p, t):
    """Enclosure of the Chebyshev series at time t (a scalar interval)."""
    s = _to_unit(p.domain, t)
    return clenshaw(p.coeffs, s)


def c0_bound(p):
    """Sum_k |p_k|, an upper bound for the sup over the domain."""
    coeffs = p.coeffs if isinstance(p, ChebPoly) else as_cinterval(p)
    return coeffs.abs().sum(axis=0)


def c0_upper(coeffs):
    """Float upper bound of sum_k |p_k| along axis 0."""
    from .interval import up_sum
    return up_sum(as_cinterval(coeffs).mag(), axis=0)


def cheb_interpolate(samples, domain):
    """Interpolant through values at the increasing extrema of ``domain``."""
    samples = as_cinterval(samples)
    K = samples.shape[0] - 1
    W = _interp_matrix(K)
    rest = samples.shape[1:]
    flat = samples.reshape(K + 1, -1)
    coeffs = iv_matmul(CInterval(W), flat).reshape(K + 1, *rest)
    return ChebPoly(domain, coeffs)


def interp_values_float(K):
    """Float interpolation matrix (values -> coefficients)."""
    return _interp_matrix(K).mid()


def eval_matrix_float(K, s):
    """Float matrix T_k(s_i) for points s."""
    s = np.asarray(s, dtype=float)
    return np.cos(np.outer(np.arccos(np.clip(s, -1, 1)), np.arange(K + 1)))


def time_average(coeffs):
    """Average over the domain: sum over even k of p_k / (1 - k^2)."""
    coeffs = as_cinterval(coeffs)
    K = coeffs.shape[0] - 1
    out = coeffs[0]
    for k in range(2, K + 1, 2):
        out = out + coeffs[k] * Interval.from_fraction(Fraction(1, 1 - k * k))
    return out


def time_average_float(coeffs):
    coeffs = np.asarray(coeffs)
    K = coeffs.shape[0] - 1
    w = np.zeros(K + 1)
    w[0::2] = 1.0 / (1.0 - np.arange(0, K + 1, 2) ** 2)
    return np.tensordot(w, coeffs, axes=(0, 0))


def cheb_derivative(coeffs, length):
    """Coefficients of d/dt for a series on a domain of the given length."""
    coeffs = as_cinterval(coeffs)
    K = coeffs.shape[0] - 1
    if K == 0:
        return CInterval.zeros(coeffs.shape)
    out = [None] * (K + 1)
    zero = CInterval.zeros(coeffs.shape[1:])
    out[K] = zero
    nxt = zero
    cur = coeffs[K] * (2.0 * K)
    out[K - 1] = cur
    for k in range(K - 1, 0, -1):
        new = nxt + coeffs[k] * (2.0 * k)
        nxt, cur = cur, new
        out[k - 1] = new
    out[0] = out[0] * 0.5
    from .sequences import stack
    d = stack(out, axis=0)
    return d * (as_interval(2.0) / as_interval(length))


def cheb_derivative_float(coeffs, length):
    coeffs = np.asarray(coeffs)
    K = coeffs.shape[0] - 1
    out = np.zeros_like(coeffs)
    if K == 0:
        return out
    out[K - 1] = 2 * K * coeffs[K]
    for k in range(K - 1, 0, -1):
        out[k - 1] = (out[k + 1] if k + 1 <= K else 0) + 2 * k * coeffs[k]
    out[0] *= 0.5
    return out * (2.0 / length)


@lru_cache(maxsize=None)
def _cheb_to_monomial_exact(K):
    """Integer matrix M with T_k(2v-1) = sum_d M[k, d] v^d."""
    x = [-1, 2]
    rows = [[1], x[:]]

    def mul_x(p):
        out = [0] * (len(p) + 1)
        for i, c in enumerate(p):
            out[i] += -c
            out[i + 1] += 2 * c
        return out

    for k in range(2, K + 1):
        a = mul_x(rows[k - 1])
        a = [2 * c for c in a]
        b = rows[k - 2] + [0] * (len(a) - len(rows[k - 2]))
        rows.append([ai - bi for ai, bi in zip(a, b)])
    M = [[Fraction(0)] * (K + 1) for _ in range(K + 1)]
    for k in range(K + 1):
        for d, c in enumerate(rows[k][:K + 1]):
            M[k][d] = Fraction(c)
    return M


@lru_cache(maxsize=None)
def cheb_to_monomial(K):
    """Interval enclosure of the Chebyshev-to-monomial matrix on [0, 1]."""
    M = _cheb_to_monomial_exact(K)
    lo = np.zeros((K + 1, K + 1))
    hi = np.zeros((K + 1, K + 1))
    for k in range(K + 1):
        for d in range(K + 1):
            iv = Interval.from_fraction(M[k][d])
            lo[k, d] = float(iv.lo)
            hi[k, d] = float(iv.hi)
    return Interval(lo, hi)


# phi functions ------------------------------------------------------------------------

_TAYLOR_TERMS = 30


@lru_cache(maxsize=None)
def _inv_fact_table(n):
    out_lo = np.zeros(n + 1)
    out_hi = np.zeros(n + 1)
    f = 1
    for k in range(n + 1):
        if k:
            f *= k
        iv = Interval.from_fraction(Fraction(1, f))
        out_lo[k] = float(iv.lo)
        out_hi[k] = float(iv.hi)
    return Interval(out_lo, out_hi)


def phi_functions(z, kmax):
    """Enclosures of phi_0..phi_kmax at complex intervals z.

    phi_0 = e^z and phi_{k+1}(z) = (phi_k(z) - 1/k!)/z.  Small arguments are
    handled by Taylor series with remainder; larger ones by the doubling
    relation phi_k(2w) = 2^-k [e^w phi_k(w) + sum_{j=1..k} phi_j(w)/(k-j)!].
    Returns a CInterval of shape (kmax+1,) + z.shape.
    """
    z = as_cinterval(z)
    mag = z.mag()
    with np.errstate(divide="ignore"):
        steps = np.where(mag > 0.5, np.ceil(np.log2(np.maximum(mag, 1e-300) / 0.5)), 0).astype(int)
    steps = np.maximum(steps, 0)
    smax = int(steps.max()) if steps.size else 0
    if smax > 1000:
        raise BoundFailure("phi function argument too large")
    scale = np.ldexp(1.0, -steps)
    w = z * scale
    nterms = _TAYLOR_TERMS
    fact = _inv_fact_table(kmax + nterms + 2)
    # Taylor: phi_k(w) = sum_p w^p/(p+k)!, |w| <= 1/2
    ks = np.arange(kmax + 1)
    shape = (kmax + 1,) + z.shape
    acc = CInterval(fact[ks + nterms].reshape((kmax + 1,) + (1,) * z.ndim).broadcast_to(shape))
    wb = w.reshape((1,) + z.shape).broadcast_to(shape)
    for p in range(nterms - 1, -1, -1):
        coef = fact[ks + p].reshape((kmax + 1,) + (1,) * z.ndim).broadcast_to(shape)
        acc = acc * wb + CInterval(coef)
    # remainder: sum_{p>=nterms+1} |w|^p/(p+k)! <= 2 |w|^(nterms+1)/(nterms+1)!
    wm = Interval(w.mag())
    rem = (wm ** (nterms + 1)) * fact[nterms + 1] * 2.0
    rem = Interval(-rem.hi, rem.hi, check=False).reshape((1,) + z.shape).broadcast_to(shape)
    phi = CInterval(acc.re + rem, acc.im + rem)
    if smax == 0:
        return phi
    # doubling matrix C[k, j] = 1/(k-j)! for 1 <= j <= k
    C_lo = np.zeros((kmax + 1, kmax + 1))
    C_hi = np.zeros((kmax + 1, kmax + 1))
    for k in range(1, kmax + 1):
        for j in range(1, k + 1):
            C_lo[k, j] = fact.lo[k - j]
            C_hi[k, j] = fact.hi[k - j]
    Cmat = CInterval(Interval(C_lo, C_hi))
    pow2 = Interval(np.ldexp(1.0, -ks).astype(float)).reshape((kmax + 1,) + (1,) * z.ndim)
    for step in range(smax):
        active = steps > step
        flat = phi.reshape(kmax + 1, -1)
        mixed = iv_matmul(Cmat, flat).reshape(shape)
        e = phi[0]
        new = (mixed + phi * e.reshape((1,) + z.shape)) * pow2
        new = new.put(0, e * e)
        mask = np.broadcast_to(active, shape)
        phi = CInterval(
            Interval(np.where(mask, new.re.lo, phi.re.lo), np.where(mask, new.re.hi, phi.re.hi), check=False),
            Interval(np.where(mask, new.im.lo, phi.im.lo), np.where(mask, new.im.hi, phi.im.hi), check=False),
        )
    return phi


def phi1_real_upper(R):
    """Upper bound of (e^R - 1)/R for R >= 0 (float array)."""
    R = np.maximum(np.asarray(R, dtype=float), 0.0)
    small = R < 1e-6
    Rs = np.where(small, 1.0, R)
    e = iv_exp(Interval(Rs))
    val = (e - 1.0) / Interval(Rs)
    return np.where(small, up_add(1.0, R), val.hi)


# Bernstein ellipse interpolation error bounds --------------------------------------

_RHO_GRID = 1.0 + np.logspace(-4, 4, 161)


class InterpErrorModel:
    """Analytic family whose interpolation error is to be bounded.

    kind ``exponential_family``: f(h) = A e^{h lam} + B h phi_1(h lam) with
    magnitudes ``amp`` (A) and ``amp_lin`` (B), h in [0, delta].
    kind ``integral_family``: f(h) = int_0^h e^{(h-s) lam} q(s) ds with
    Chebyshev coefficient magnitudes ``qmag`` of shape (D+1, ...).
    """

    def __init__(self, kind, lam, delta, Ktilde, amp=None, amp_lin=None, qmag=None):
        if kind not in ("exponential_family", "integral_family"):
            raise UsageError(f"unknown interpolation family {kind!r}")
        self.kind = kind
        self.lam = as_cinterval(lam)
        self.delta = float(delta)
        self.Ktilde = int(Ktilde)
        shape = self.lam.shape
        self.amp = np.zeros(shape) if amp is None else np.broadcast_to(np.asarray(amp, float), shape)
        self.amp_lin = np.zeros(shape) if amp_lin is None else np.broadcast_to(np.asarray(amp_lin, float), shape)
        self.qmag = None if qmag is None else np.asarray(qmag, float)


def _growth_float(lam, delta, rho):
    """Float estimate of R(rho) = max Re(z lam) over the mapped ellipse."""
    p = lam.real[..., None]
    q = lam.imag[..., None]
    a = (rho + 1 / rho) / 2
    b = (rho - 1 / rho) / 2
    return 0.5 * delta * (p + np.sqrt((a * p) ** 2 + (b * q) ** 2))


def _growth_upper(lam, delta, rho):
    """Rigorous upper bound of R(rho) for each entry (rho exact floats)."""
    rho_iv = Interval(rho)
    a = (rho_iv + 1.0 / rho_iv) * 0.5
    b = (rho_iv - 1.0 / rho_iv) * 0.5
    p = lam.re
    q = lam.im
    inner = (a.sqr() * p.sqr() + b.sqr() * q.sqr()).sqrt()
    R = (p + inner) * (as_interval(delta) * 0.5)
    return np.maximum(R.hi, 0.0), a


def _log_pos(x):
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.log(np.maximum(x, 1e-320)), -np.inf)


def interp_error_bound(model):
    """Upper bounds (Interval [0, b]) of ||f - P_K f||_C0 per family entry."""
    lam_mid = model.lam.mid()
    rho = _RHO_GRID
    K = model.Ktilde
    d = model.delta
    R = _growth_float(lam_mid, d, rho)
    a = (rho + 1 / rho) / 2
    zmax = 0.5 * d * (1 + a)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if model.kind == "exponential_family":
            A = model.amp[..., None]
            B = model.amp_lin[..., None]
            phi1 = np.where(R > 1e-8, np.expm1(np.minimum(R, 700)) / np.where(R > 1e-8, R, 1), 1.0)
            logM = np.logaddexp(_log_pos(A) + R, _log_pos(B) + np.log(zmax) + np.log(phi1))
        else:
            Dq = model.qmag.shape[0] - 1
            kk = np.arange(Dq + 1)
            cosh_tab = 0.5 * (rho[None, :] ** kk[:, None] + rho[None, :] ** (-kk[:, None]))
            S = np.tensordot(np.moveaxis(model.qmag, 0, -1), cosh_tab, axes=(-1, 0))
            phi1 = np.where(R > 1e-8, np.expm1(np.minimum(R, 700)) / np.where(R > 1e-8, R, 1), 1.0)
            logM = _log_pos(S) + np.log(zmax) + np.log(phi1)
        logB = np.log(4.0) + logM - K * np.log(rho) - np.log(rho - 1)
    logB = np.where(np.isnan(logB), np.inf, logB)
    best = np.argmin(logB, axis=-1)
    zero = np.all(np.isneginf(logB), axis=-1)
    rho_sel = rho[best]
    out = _rigorous_at(model, rho_sel)
    out = np.where(zero, 0.0, out)
    if np.any(~np.isfinite(out)):
        raise BoundFailure("interpolation error bound diverged; raise the interpolation order")
    return Interval(np.zeros(out.shape), out)


def _rigorous_at(model, rho_sel):
    K = model.Ktilde
    R, a = _growth_upper(model.lam, model.delta, rho_sel)
    rho_iv = Interval(rho_sel)
    zmax = ((a + 1.0) * (as_interval(model.delta) * 0.5)).hi
    eR = iv_exp(Interval(R)).hi
    phi1 = phi1_real_upper(R)
    if model.kind == "exponential_family":
        M = up_add(up_mul(model.amp, eR), up_mul(up_mul(model.amp_lin, zmax), phi1))
    else:
        Dq = model.qmag.shape[0] - 1
        S = np.zeros(rho_sel.shape)
        for k in range(Dq + 1):
            ch = ((rho_iv ** k) + 1.0 / (rho_iv ** k)) * 0.5
            S = up_add(S, up_mul(model.qmag[k], ch.hi))
        M = up_mul(up_mul(S, zmax), phi1)
    factor = (Interval(4.0) / (rho_iv ** K) / (rho_iv - 1.0)).hi
    return up_mul(M, factor)


# space-time sequences ---------------------------------------------------------------

def _st_product_op(A, B):
    """Chebyshev product in time (axis 0) and full convolution in space."""
    Ka, na = A.shape
    Kb, nb = B.shape
    nout = na + nb - 1
    i = np.arange(nout)[:, None]
    j = np.arange(nb)[None, :]
    idx = i - j
    valid = (idx >= 0) & (idx < na)
    T = np.where(valid[None, :, :], A[:, np.where(valid, idx, 0)], 0.0)
    P = T @ B.T                       # (Ka, nout, Kb)
    P = np.transpose(P, (0, 2, 1)).reshape(Ka * Kb, nout)
    aa, bb = np.meshgrid(np.arange(Ka), np.arange(Kb), indexing="ij")
    aa = aa.ravel()
    bb = bb.ravel()
    out = np.zeros((Ka + Kb - 1, nout))
    half = 0.5 * P
    np.add.at(out, aa + bb, half)
    np.add.at(out, np.abs(aa - bb), half)
    return out


def st_product_arrays(A, B):
    """Interval space-time product of two-sided coefficient arrays."""
    Ka, na = A.shape
    Kb, nb = B.shape
    nterms = 2 * min(Ka, Kb) * min(na, nb) + 2
    return cbilinear(_st_product_op, A, B, nterms)


def st_product_float(A, B):
    """Float version (complex arrays), used by the approximate solver."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    re = _st_product_op(A.real, B.real) - _st_product_op(A.imag, B.imag)
    im = _st_product_op(A.real, B.imag) + _st_product_op(A.imag, B.real)
    return re + 1j * im


class STSeq:
    """Space-time polynomial: Chebyshev in time (axis 0), Fourier in space."""

    __slots__ = ("coeffs", "nu", "sym", "N", "domain")

    def __init__(self, coeffs, nu, sym, domain):
        coeffs = as_cinterval(coeffs)
        if coeffs.ndim != 2:
            raise UsageError("space-time coefficients must be two-dimensional")
        self.coeffs = coeffs
        self.nu = float(nu)
        self.sym = sym
        n = coeffs.shape[1]
        self.N = (n - 1) // 2 if sym == "none" else (n - 1 if sym == "even" else n)
        self.domain = (float(domain[0]), float(domain[1]))

    @classmethod
    def from_array(cls, values, nu, sym, domain):
        return cls(CInterval.point(np.asarray(values, dtype=complex)), nu, sym, domain)

    @property
    def K(self):
        return self.coeffs.shape[0] - 1

    @property
    def indices(self):
        return mode_indices(self.sym, self.N)

    def two_sided(self):
        return to_two_sided(self.coeffs, self.sym, self.N)

    def _new(self, coeffs, sym=None):
        return STSeq(coeffs, self.nu, self.sym if sym is None else sym, self.domain)

    def resize(self, N=None, K=None):
        c = self.coeffs
        if N is not None and N != self.N:
            c = pad_last(c, self.sym, self.N, N)
        if K is not None and K != self.K:
            if K < self.K:
                c = c[:K + 1]
            else:
                c = concat([c, CInterval.zeros((K - self.K, c.shape[1]))], axis=0)
        return self._new(c)

    def with_symmetry(self, sym):
        if sym == self.sym:
            return self
        return STSeq(self.two_sided(), self.nu, "none", self.domain)

    def _align(self, other):
        a, b = self, other
        if a.sym != b.sym:
            a, b = a.with_symmetry("none"), b.with_symmetry("none")
        N = max(a.N, b.N)
        K = max(a.K, b.K)
        return a.resize(N, K), b.resize(N, K)

    def __add__(self, other):
        a, b = self._align(other)
        return a._new(a.coeffs + b.coeffs)

    def __sub__(self, other):
        a, b = self._align(other)
        return a._new(a.coeffs - b.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def scale(self, c):
        return self._new(self.coeffs * c)

    def __mul__(self, other):
        if isinstance(other, STSeq):
            return st_multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def add_constant(self, c):
        c = as_cinterval(c)
        if c.re.is_zero() and c.im.is_zero():
            return self
        a = self if self.sym != "odd" else self.with_symmetry("none")
        idx = (0, a.N if a.sym == "none" else 0)
        return a._new(a.coeffs.put(idx, a.coeffs[idx] + c))

    def derivative(self, j, absval=False):
        if j == 0:
            return self
        fac = derivative_factor(self.indices, j, absval)
        vals = self.coeffs * fac.reshape(1, -1)
        if absval:
            return self._new(vals)
        sym = derivative_parity(self.sym, j)
        if sym == self.sym:
            return self._new(vals, sym)
        if self.sym == "odd":
            return STSeq(concat([CInterval.zeros((self.K + 1, 1)), vals], axis=1), self.nu, "even", self.domain)
        return STSeq(vals[:, 1:], self.nu, "odd", self.domain)

    def time_average(self):
        return FourierSeq(time_average(self.coeffs), self.nu, self.sym)

    def at_coefficient(self, k):
        return FourierSeq(self.coeffs[k], self.nu, self.sym)

    def c0_modes(self):
        """Interval enclosure of sum_k |coeff_{k,n}| for each stored n."""
        return self.coeffs.abs().sum(axis=0)

    def c0_modes_upper(self):
        return c0_upper(self.coeffs)

    def norm_X(self):
        """Upper bound of sup_t ||u(t)||_{l1_nu} via coefficient sums."""
        w = mode_weights(self.sym, self.indices, self.nu)
        return (self.c0_modes() * w).sum()

    def eval_unit(self, s):
        """FourierSeq at the unit-time point s in [-1, 1]."""
        return FourierSeq(clenshaw(self.coeffs, as_interval(s)), self.nu, self.sym)

    def eval_time(self, t):
        s = _to_unit(self.domain, t)
        return FourierSeq(clenshaw(self.coeffs, s), self.nu, self.sym)

    def mid(self):
        return self.coeffs.mid()


def st_multiply(a, b):
    if a.nu != b.nu:
        raise UsageError("mismatched nu")
    sym = parity_product(a.sym, b.sym)
    full = st_product_arrays(a.two_sided(), b.two_sided())
    N = a.N + b.N
    coeffs = from_two_sided(full, sym, N) if sym != "none" else full
    return STSeq(coeffs, a.nu, sym, a.domain)


def st_constant(seq, K, domain):
    """Lift a FourierSeq to a time-constant space-time sequence of degree K."""
    c = seq.coeffs.reshape(1, -1)
    if K:
        c = concat([c, CInterval.zeros((K, c.shape[1]))], axis=0)
    return STSeq(c, seq.nu, seq.sym, domain)
