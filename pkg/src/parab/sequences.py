"""Fourier coefficient sequences in the weighted space l1_nu.

Symmetric sequences are stored one-sided: ``even`` keeps n = 0..N and
``odd`` keeps n = 1..N, the negative modes being recovered by reflection.
Sequences without symmetry store n = -N..N.  Coefficients are always
complex interval arrays.
"""

from functools import lru_cache

import numpy as np

from .errors import UsageError
from .interval import (
    CInterval, Interval, as_cinterval, as_interval, cbilinear, iv_convolve,
)

SYMMETRIES = ("none", "even", "odd")


def check_symmetry(sym):
    if sym not in SYMMETRIES:
        raise UsageError(f"unknown symmetry {sym!r}")
    return sym


def mode_indices(sym, N):
    """Stored mode numbers for a sequence of order N."""
    if sym == "none":
        return np.arange(-N, N + 1)
    if sym == "even":
        return np.arange(0, N + 1)
    if sym == "odd":
        return np.arange(1, N + 1)
    raise UsageError(f"unknown symmetry {sym!r}")


def mode_multiplicity(sym, n):
    n = np.asarray(n)
    if sym == "none":
        return np.ones(n.shape)
    return np.where(n == 0, 1.0, 2.0)


@lru_cache(maxsize=64)
def _nu_table(nu, kmax):
    lo = np.empty(kmax + 1)
    hi = np.empty(kmax + 1)
    p = as_interval(1.0)
    step = as_interval(nu)
    for k in range(kmax + 1):
        lo[k], hi[k] = float(p.lo), float(p.hi)
        p = p * step
    lo.flags.writeable = False
    hi.flags.writeable = False
    return lo, hi


def nu_powers(nu, n):
    """Enclosures of nu**|n| for an integer array n."""
    n = np.abs(np.asarray(n, dtype=int))
    if n.size == 0:
        return Interval(np.zeros(n.shape))
    # table sizes grow in powers of two so that the cache is reused
    kmax = 1 << int(np.max(n)).bit_length()
    lo, hi = _nu_table(float(nu), kmax)
    return Interval(lo[n], hi[n], check=False)


def mode_weights(sym, n, nu):
    """Weights w_n such that the l1_nu norm is sum_n w_n |a_n| over stored n."""
    return nu_powers(nu, n) * mode_multiplicity(sym, n)


def parity_product(s1, s2):
    if s1 == "none" or s2 == "none":
        return "none"
    return "even" if s1 == s2 else "odd"


def derivative_parity(sym, j):
    if sym == "none" or j % 2 == 0:
        return sym
    return "odd" if sym == "even" else "even"


def _reflect_sign(sym):
    return -1.0 if sym == "odd" else 1.0


def to_two_sided(coeffs, sym, N):
    """Expand one-sided storage (last axis) to indices -N..N."""
    if sym == "none":
        return coeffs
    s = _reflect_sign(sym)
    lead = coeffs.shape[:-1]
    if sym == "even":
        pos = coeffs
        neg = coeffs[..., ::-1][..., :-1] if N > 0 else None
        if neg is None:
            return pos
        neg = neg if s > 0 else -neg
        return _concat_last([neg, pos])
    zero = CInterval.zeros(lead + (1,))
    if N == 0:
        return zero
    neg = -coeffs[..., ::-1]
    return _concat_last([neg, zero, coeffs])


def from_two_sided(coeffs, sym, N):
    """Restrict a two-sided array over -N..N to stored indices."""
    if sym == "none":
        return coeffs
    if sym == "even":
        return coeffs[..., N:]
    return coeffs[..., N + 1:]


def _concat_last(parts):
    re = np.concatenate([p.re.lo for p in parts], axis=-1), np.concatenate([p.re.hi for p in parts], axis=-1)
    im = np.concatenate([p.im.lo for p in parts], axis=-1), np.concatenate([p.im.hi for p in parts], axis=-1)
    return CInterval(Interval(*re, check=False), Interval(*im, check=False))


def concat(parts, axis=-1):
    re = (np.concatenate([p.re.lo for p in parts], axis=axis),
          np.concatenate([p.re.hi for p in parts], axis=axis))
    im = (np.concatenate([p.im.lo for p in parts], axis=axis),
          np.concatenate([p.im.hi for p in parts], axis=axis))
    return CInterval(Interval(*re, check=False), Interval(*im, check=False))


def stack(parts, axis=0):
    re = (np.stack([p.re.lo for p in parts], axis=axis), np.stack([p.re.hi for p in parts], axis=axis))
    im = (np.stack([p.im.lo for p in parts], axis=axis), np.stack([p.im.hi for p in parts], axis=axis))
    return CInterval(Interval(*re, check=False), Interval(*im, check=False))


def pad_last(coeffs, sym, n_old, n_new):
    """Zero-pad or truncate the stored last axis from order n_old to n_new."""
    if n_new == n_old:
        return coeffs
    if sym == "none":
        if n_new < n_old:
            d = n_old - n_new
            return coeffs[..., d:coeffs.shape[-1] - d]
        z = CInterval.zeros(coeffs.shape[:-1] + (n_new - n_old,))
        return _concat_last([z, coeffs, z])
    if n_new < n_old:
        keep = len(mode_indices(sym, n_new))
        return coeffs[..., :keep]
    z = CInterval.zeros(coeffs.shape[:-1] + (n_new - n_old,))
    return _concat_last([coeffs, z])


def imag_unit_power(j):
    """(re, im) of i**j."""
    return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][j % 4]


def derivative_factor(n, j, absval=False):
    """Enclosure of (i n)**j, or |n|**j when absval is set, as a CInterval."""
    n = np.asarray(n)
    mag = Interval(np.abs(n).astype(float)) ** j if j else Interval(np.ones(n.shape))
    if absval:
        return CInterval(mag)
    sign = np.sign(n) ** j if j % 2 else np.ones(n.shape)
    mag = mag * sign.astype(float)
    re, im = imag_unit_power(j)
    return CInterval(mag * re, mag * im)


class FourierSeq:
    """Finitely supported element of l1_nu with complex interval coefficients."""

    __slots__ = ("coeffs", "nu", "sym", "N")

    def __init__(self, coeffs, nu, sym="none"):
        check_symmetry(sym)
        coeffs = as_cinterval(coeffs)
        if coeffs.ndim != 1:
            raise UsageError("FourierSeq coefficients must be one-dimensional")
        n = coeffs.shape[0]
        if sym == "none":
            if n % 2 != 1:
                raise UsageError("two-sided storage needs an odd length")
            N = (n - 1) // 2
        elif sym == "even":
            N = n - 1
        else:
            N = n
        if nu < 1:
            raise UsageError("nu must be >= 1")
        self.coeffs = coeffs
        self.nu = float(nu)
        self.sym = sym
        self.N = N

    @classmethod
    def from_array(cls, values, nu, sym="none"):
        return cls(CInterval.point(np.asarray(values, dtype=complex)), nu, sym)

    @classmethod
    def zeros(cls, N, nu, sym="none"):
        return cls(CInterval.zeros(len(mode_indices(sym, N))), nu, sym)

    @classmethod
    def delta(cls, nu, sym="even"):
        if sym == "odd":
            raise UsageError("odd sequences cannot carry a constant mode")
        return cls(CInterval.point(np.array([1.0 + 0j])), nu, sym)

    @classmethod
    def from_two_sided(cls, coeffs, nu, sym):
        N = (coeffs.shape[0] - 1) // 2
        return cls(from_two_sided(coeffs, sym, N), nu, sym)

    @property
    def indices(self):
        return mode_indices(self.sym, self.N)

    def weights(self):
        return mode_weights(self.sym, self.indices, self.nu)

    def two_sided(self):
        return to_two_sided(self.coeffs, self.sym, self.N)

    def mid(self):
        return self.coeffs.mid()

    def coefficient(self, n):
        if abs(n) > self.N:
            return as_cinterval(0.0)
        if self.sym == "none":
            return self.coeffs[n + self.N]
        if n < 0:
            c = self.coefficient(-n)
            return -c if self.sym == "odd" else c
        if self.sym == "odd":
            return as_cinterval(0.0) if n == 0 else self.coeffs[n - 1]
        return self.coeffs[n]

    def with_symmetry(self, sym):
        """View in a coarser symmetry class (only conversion to 'none')."""
        if sym == self.sym:
            return self
        if sym != "none":
            raise UsageError(f"cannot convert {self.sym} to {sym}")
        return FourierSeq(self.two_sided(), self.nu, "none")

    def resize(self, N):
        return FourierSeq(pad_last(self.coeffs, self.sym, self.N, N), self.nu, self.sym)

    def norm(self):
        return l1nu_norm(self)

    def _align(self, other):
        if not isinstance(other, FourierSeq):
            raise UsageError("expected a FourierSeq")
        if other.nu != self.nu:
            raise UsageError("mismatched nu")
        a, b = self, other
        if a.sym != b.sym:
            a, b = a.with_symmetry("none"), b.with_symmetry("none")
        N = max(a.N, b.N)
        return a.resize(N), b.resize(N)

    def __add__(self, other):
        a, b = self._align(other)
        return FourierSeq(a.coeffs + b.coeffs, a.nu, a.sym)

    def __sub__(self, other):
        a, b = self._align(other)
        return FourierSeq(a.coeffs - b.coeffs, a.nu, a.sym)

    def __neg__(self):
        return FourierSeq(-self.coeffs, self.nu, self.sym)

    def scale(self, c):
        return FourierSeq(self.coeffs * c, self.nu, self.sym)

    def __mul__(self, other):
        if isinstance(other, FourierSeq):
            return convolve(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def add_constant(self, c):
        c = as_cinterval(c)
        if c.re.is_zero() and c.im.is_zero():
            return self
        a = self if self.sym != "odd" else self.with_symmetry("none")
        idx = a.N if a.sym == "none" else 0
        return FourierSeq(a.coeffs.put(idx, a.coeffs[idx] + c), a.nu, a.sym)

    def project(self, N, side="leq"):
        return project(self, N, side)

    def derivative(self, j, absval=False):
        return derivative_seq(self, j, absval)

    def __repr__(self):
        return f"FourierSeq(N={self.N}, nu={self.nu}, sym={self.sym})"


class TailBoundedSeq:
    """Known modes up to ``tail_start`` plus a norm bound on the rest."""

    __slots__ = ("finite", "tail_norm", "tail_start")

    def __init__(self, finite, tail_norm=0.0, tail_start=None):
        tail_norm = as_interval(tail_norm)
        if np.any(tail_norm.lo < 0):
            tail_norm = Interval(np.maximum(tail_norm.lo, 0.0), tail_norm.hi, check=False)
        self.finite = finite
        self.tail_norm = tail_norm
        self.tail_start = finite.N if tail_start is None else int(tail_start)

    @property
    def nu(self):
        return self.finite.nu

    @property
    def sym(self):
        return self.finite.sym

    def project(self, N, side="leq"):
        return project(self, N, side)

    def __repr__(self):
        return f"TailBoundedSeq(N={self.tail_start}, tail<={float(self.tail_norm.hi):.3g})"


def l1nu_norm(a):
    """Enclosure of sum_n |a_n| nu^|n|."""
    if a.coeffs.shape[0] == 0:
        return Interval(0.0)
    return (a.coeffs.abs() * a.weights()).sum()


def convolve(a, b):
    """Discrete convolution with propagated symmetry."""
    if a.nu != b.nu:
        raise UsageError("convolution of sequences with different nu")
    sym = parity_product(a.sym, b.sym)
    full = iv_convolve(a.two_sided(), b.two_sided())
    N = a.N + b.N
    out = FourierSeq.from_two_sided(full, a.nu, sym) if sym != "none" else FourierSeq(full, a.nu, "none")
    if out.N != N:
        out = out.resize(N)
    return out


def project(a, N, side="leq"):
    """Pi^{<=N} or Pi^{>N}."""
    if N < 0:
        raise UsageError("projection order must be >= 0")
    if side not in ("leq", "gt"):
        raise UsageError(f"unknown side {side!r}")
    if isinstance(a, TailBoundedSeq):
        if side == "leq":
            fin = project(a.finite, N, "leq")
            if N <= a.tail_start:
                return TailBoundedSeq(fin, 0.0, max(N, fin.N))
            return TailBoundedSeq(fin, a.tail_norm, a.tail_start)
        fin = project(a.finite, N, "gt")
        return TailBoundedSeq(fin, a.tail_norm, a.tail_start)
    if side == "leq":
        if N >= a.N:
            return a
        return a.resize(N)
    keep = np.abs(a.indices) > N
    mask = keep.astype(float)
    return FourierSeq(a.coeffs * mask, a.nu, a.sym)


def derivative_seq(a, j, absval=False):
    """Multiply entry n by (i n)**j, or by |n|**j if absval."""
    if j < 0:
        raise UsageError("derivative order must be >= 0")
    if j == 0:
        return a
    fac = derivative_factor(a.indices, j, absval)
    vals = a.coeffs * fac
    if absval:
        return FourierSeq(vals, a.nu, a.sym)
    sym = derivative_parity(a.sym, j)
    if sym == a.sym:
        return FourierSeq(vals, a.nu, sym)
    if a.sym == "odd":
        # odd -> even: prepend the (zero) constant mode
        return FourierSeq(_concat_last([CInterval.zeros(1), vals]), a.nu, "even")
    # even -> odd: the constant mode is annihilated
    return FourierSeq(vals[1:], a.nu, "odd")


# polynomials --------------------------------------------------------------

class Poly:
    """Real polynomial sum_k c_k x**k with interval coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, Interval):
            c = coeffs
        else:
            coeffs = list(coeffs) if len(coeffs) else [0.0]
            parts = [as_interval(c) for c in coeffs]
            c = Interval(np.array([float(p.lo) for p in parts]), np.array([float(p.hi) for p in parts]))
        # drop exact-zero leading coefficients
        n = c.shape[0]
        while n > 1 and c.lo[n - 1] == 0 and c.hi[n - 1] == 0:
            n -= 1
        self.coeffs = c[:n]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def coefficient(self, k):
        return self.coeffs[k]

    def is_zero(self):
        return self.coeffs.is_zero()

    def derivative(self):
        if self.degree == 0:
            return Poly([0.0])
        k = np.arange(1, self.degree + 1, dtype=float)
        return Poly(self.coeffs[1:] * k)

    def abs_poly(self):
        """|g|: the polynomial with coefficient magnitudes."""
        return Poly(Interval(self.coeffs.mag()))

    def parity(self):
        """'even', 'odd', 'zero' or 'none' according to nonzero powers."""
        nz = [k for k in range(self.degree + 1)
              if not (self.coeffs.lo[k] == 0 and self.coeffs.hi[k] == 0)]
        if not nz:
            return "zero"
        if all(k % 2 == 0 for k in nz):
            return "even"
        if all(k % 2 == 1 for k in nz):
            return "odd"
        return "none"

    def eval(self, x):
        """Horner evaluation on scalar (complex) intervals or arrays."""
        p = self.coeffs[self.degree]
        if isinstance(x, CInterval):
            p = as_cinterval(p)
        for k in range(self.degree - 1, -1, -1):
            p = p * x + self.coeffs[k]
        return p

    def __call__(self, a):
        if isinstance(a, FourierSeq) or hasattr(a, "add_constant"):
            return apply_poly(self, a)
        return self.eval(a)

    def mid(self):
        return self.coeffs.mid()

    def __repr__(self):
        return f"Poly({list(self.coeffs.mid())})"


def apply_poly(g, a):
    """Coefficients of g(a) by Horner over convolution powers."""
    if not isinstance(g, Poly):
        g = Poly(g)
    d = g.degree
    if d == 0:
        return a.scale(0.0).add_constant(g.coeffs[0])
    acc = a.scale(g.coeffs[d])
    for k in range(d - 1, 0, -1):
        acc = acc.add_constant(g.coeffs[k]) * a
    return acc.add_constant(g.coeffs[0])


# operators ----------------------------------------------------------------

class DiagonalTail:
    """Diagonal action n -> d_n for |n| > N_blk.

    ``values(n)`` returns an Interval of upper/lower bounds of |d_n| for an
    integer array n; ``monotone_from`` certifies that |d_n| is nonincreasing
    in |n| for |n| >= monotone_from.
    """

    def __init__(self, values, monotone_from):
        self.values = values
        self.monotone_from = int(monotone_from)

    def sup_abs(self, N, sym="none"):
        """Enclosure of sup_{|n| > N} |d_n|."""
        stop = max(N + 1, self.monotone_from)
        n = np.arange(N + 1, stop + 1)
        if sym == "none":
            n = np.concatenate([n, -n])
        v = self.values(n)
        v = as_interval(v) if not isinstance(v, Interval) else v
        return Interval(np.max(v.lo), np.max(v.hi), check=False)


class SeqOperator:
    """Finite block on |n| <= N_blk (rows may extend further) plus a diagonal tail."""

    def __init__(self, block, nu, sym="none", N_blk=None, tail=None, row_N=None):
        self.block = as_cinterval(block)
        self.nu = float(nu)
        self.sym = check_symmetry(sym)
        ncols = self.block.shape[1]
        self.N_blk = _order_from_length(sym, ncols) if N_blk is None else int(N_blk)
        self.row_N = _order_from_length(sym, self.block.shape[0]) if row_N is None else int(row_N)
        self.tail = tail

    def col_indices(self):
        return mode_indices(self.sym, self.N_blk)

    def row_indices(self):
        return mode_indices(self.sym, self.row_N)

    def apply(self, a):
        """Apply to a finitely supported sequence (tail diagonal included)."""
        from .interval import iv_matmul
        a = a.resize(max(a.N, self.N_blk))
        head = pad_last(a.coeffs, self.sym, a.N, self.N_blk)
        out = iv_matmul(self.block, head.reshape(-1, 1)).reshape(-1)
        res = FourierSeq(out, self.nu, self.sym)
        if a.N > self.N_blk and self.tail is not None:
            n = a.indices
            big = np.abs(n) > self.N_blk
            d = self.tail_values(n[big])
            tail_part = CInterval.zeros(a.coeffs.shape)
            vals = a.coeffs[big] * d
            tail_part = tail_part.put(np.nonzero(big)[0], vals)
            res = res + FourierSeq(tail_part, self.nu, self.sym)
        return res

    def tail_values(self, n):
        v = self.tail.values(n)
        return as_cinterval(v)


def _order_from_length(sym, length):
    if sym == "none":
        return (length - 1) // 2
    if sym == "even":
        return length - 1
    return length


def column_norms(block_abs, sym, row_n, col_n, nu):
    """Weighted column sums sum_n |A_nk| w_n / w_k as an Interval vector."""
    wr = mode_weights(sym, row_n, nu)
    wc = mode_weights(sym, col_n, nu)
    weighted = block_abs * wr.reshape(-1, 1)
    return weighted.sum(axis=0) / wc


def opnorm_l1nu(A):
    """Enclosure of the l1_nu operator norm of block plus diagonal tail."""
    parts_lo = [0.0]
    parts_hi = [0.0]
    if A.block.size:
        cols = column_norms(A.block.abs(), A.sym, A.row_indices(), A.col_indices(), A.nu)
        parts_lo.append(float(np.max(cols.lo)))
        parts_hi.append(float(np.max(cols.hi)))
    if A.tail is not None:
        s = A.tail.sup_abs(A.N_blk, A.sym)
        parts_lo.append(float(s.lo))
        parts_hi.append(float(s.hi))
    return Interval(max(parts_lo), max(parts_hi))


def conv_matrix(kernel, sym_k, sym_in, rows_N, cols_N):
    """Matrix of h -> kernel * h restricted to symmetric subspaces.

    ``kernel`` is a two-sided CInterval over -Nk..Nk with parity ``sym_k``;
    input vectors live in ``sym_in`` storage of order cols_N, outputs in
    the product parity storage of order rows_N.  Symmetric inputs are
    folded: column k collects kernel_{n-k} + s kernel_{n+k}.
    """
    sym_out = parity_product(sym_k, sym_in)
    Nk = (kernel.shape[0] - 1) // 2
    rows = mode_indices(sym_out, rows_N)
    cols = mode_indices(sym_in, cols_N)

    def gather(offsets):
        idx = offsets + Nk
        valid = (idx >= 0) & (idx < kernel.shape[0])
        safe = np.where(valid, idx, 0)
        g = kernel[safe]
        m = valid.astype(float)
        return CInterval(g.re * m, g.im * m)

    diff = rows[:, None] - cols[None, :]
    A = gather(diff)
    if sym_in != "none":
        s = _reflect_sign(sym_in)
        summ = rows[:, None] + cols[None, :]
        B = gather(summ)
        colmask = (cols[None, :] > 0).astype(float) * np.ones((len(rows), 1))
        A = A + B * (s * colmask)
    return A, sym_out


def conv_matrix_float(kernel, sym_k, sym_in, rows_N, cols_N):
    """Floating-point counterpart of :func:`conv_matrix` (complex arrays)."""
    sym_out = parity_product(sym_k, sym_in)
    Nk = (kernel.shape[0] - 1) // 2
    rows = mode_indices(sym_out, rows_N)
    cols = mode_indices(sym_in, cols_N)
    kpad = np.concatenate([kernel, [0.0]])

    def gather(offsets):
        idx = offsets + Nk
        valid = (idx >= 0) & (idx < kernel.shape[0])
        return kpad[np.where(valid, idx, -1)]

    A = gather(rows[:, None] - cols[None, :])
    if sym_in != "none":
        s = _reflect_sign(sym_in)
        B = gather(rows[:, None] + cols[None, :])
        A = A + s * B * (cols[None, :] > 0)
    return A, sym_out
