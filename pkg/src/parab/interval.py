"""Vectorised interval arithmetic with outward rounding.

Every ``Interval`` wraps two float64 arrays ``lo`` and ``hi`` of the same
shape.  Rounding is made outward by moving round-to-nearest results to the
neighbouring float when an error-free transformation shows that the exact
value lies on that side, so no global FPU state is ever touched.

Heavy bilinear operations (matrix products, convolutions) go through a
midpoint-radius evaluation with an a-priori bound on the floating-point
summation error.  They still evaluate the plain double sum, just on the
midpoints.
"""

import re
from fractions import Fraction

import numpy as np

from .errors import DomainError, FormatError

_U = 2.0 ** -53
_ETA = 2.0 ** -1074
_TINY_NORMAL = 2.0 ** -1022
_SPLITTER = 2.0 ** 27 + 1.0
# the error-free product is trusted only inside this magnitude window
_SAFE_HI = 2.0 ** 995
_SAFE_LO = 2.0 ** -960

_EXP_MAX = 709.782712893384
_EXP_MIN = -745.2


def _down(x):
    return np.nextafter(x, -np.inf)


def _up(x):
    return np.nextafter(x, np.inf)


def _upnn(x):
    """Round a non-negative result up; exact zeros stay zero (underflow is
    accounted for separately by the callers)."""
    return np.where(x > 0, _up(x), x)


def _gamma(n):
    """Upper bound for n*u/(1-n*u), valid as long as n*u < 1/2."""
    return (np.asarray(n, dtype=float) + 1.0) * 2.0 * _U


def two_sum(a, b):
    s = a + b
    with np.errstate(invalid="ignore"):  # inf operands give nan errors, treated as unsafe
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Product and its exact rounding error (Dekker)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _round_pair(s, err, safe):
    """Outward bounds of s+err given s=fl(exact)."""
    lo = np.where(safe & (err >= 0), s, _down(s))
    hi = np.where(safe & (err <= 0), s, _up(s))
    return lo, hi


def _clean(lo, hi):
    lo = np.where(np.isnan(lo), -np.inf, lo)
    hi = np.where(np.isnan(hi), np.inf, hi)
    return lo, hi


def _as_float(x):
    return np.asarray(x, dtype=float)


class Interval:
    """Array of closed real intervals [lo, hi]."""

    __slots__ = ("lo", "hi", "overflow")
    __array_priority__ = 100

    def __init__(self, lo, hi=None, check=True):
        lo = _as_float(lo)
        hi = lo if hi is None else _as_float(hi)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
        self.lo = lo
        self.hi = hi
        self.overflow = False
        if check:
            if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
                raise DomainError("NaN endpoint")
            if np.any(lo > hi):
                raise DomainError("empty interval (lo > hi)")

    # construction -----------------------------------------------------
    @classmethod
    def point(cls, x):
        return cls(x)

    @classmethod
    def zeros(cls, shape):
        z = np.zeros(shape)
        return cls(z, z.copy(), check=False)

    @classmethod
    def from_midrad(cls, mid, rad):
        mid = _as_float(mid)
        rad = _as_float(rad)
        with np.errstate(invalid="ignore", over="ignore"):
            s1, e1 = two_sum(mid, -rad)
            s2, e2 = two_sum(mid, rad)
            lo = np.where(np.isfinite(e1) & (e1 >= 0), s1, _down(s1))
            hi = np.where(np.isfinite(e2) & (e2 <= 0), s2, _up(s2))
        lo, hi = _clean(lo, hi)
        return cls(lo, hi, check=False)

    @classmethod
    def from_fraction(cls, q):
        """Tightest enclosure of a rational number (scalar)."""
        q = Fraction(q)
        f = float(q)
        fq = Fraction(f)
        if fq == q:
            return cls(f)
        if fq < q:
            return cls(f, float(_up(f)))
        return cls(float(_down(f)), f)

    @classmethod
    def hull_of(cls, a, b):
        return cls(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi), check=False)

    # array protocol -----------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def size(self):
        return self.lo.size

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        return Interval(self.lo[idx], self.hi[idx], check=False)

    def reshape(self, *shape):
        return Interval(self.lo.reshape(*shape), self.hi.reshape(*shape), check=False)

    @property
    def T(self):
        return Interval(self.lo.T, self.hi.T, check=False)

    def transpose(self, *axes):
        return Interval(self.lo.transpose(*axes), self.hi.transpose(*axes), check=False)

    def broadcast_to(self, shape):
        return Interval(np.broadcast_to(self.lo, shape).copy(),
                        np.broadcast_to(self.hi, shape).copy(), check=False)

    def copy(self):
        return Interval(self.lo.copy(), self.hi.copy(), check=False)

    def put(self, idx, other):
        """Return a copy with entries ``idx`` replaced by ``other``."""
        other = as_interval(other)
        lo = self.lo.copy()
        hi = self.hi.copy()
        lo[idx] = other.lo
        hi[idx] = other.hi
        return Interval(lo, hi, check=False)

    def __repr__(self):
        if self.ndim == 0:
            return f"Interval([{float(self.lo)!r}, {float(self.hi)!r}])"
        return f"Interval(shape={self.shape}, lo={self.lo!r}, hi={self.hi!r})"

    # queries --------------------------------------------------------------
    def mid(self):
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.where(np.isfinite(m), m, np.where(np.isfinite(self.lo), self.lo,
                                                    np.where(np.isfinite(self.hi), self.hi, 0.0)))

    def rad(self):
        """Upper bound of the radius around ``mid()``."""
        m = self.mid()
        with np.errstate(invalid="ignore", over="ignore"):
            d1, e1 = two_sum(self.hi, -m)
            d2, e2 = two_sum(m, -self.lo)
            r1 = np.where(e1 > 0, _up(d1), d1)
            r2 = np.where(e2 > 0, _up(d2), d2)
            r = np.maximum(r1, r2)
        return np.where(np.isnan(r) | ~np.isfinite(m), np.inf, r)

    def width(self):
        return _up(self.hi - self.lo)

    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        inside = (self.lo <= 0) & (self.hi >= 0)
        return np.where(inside, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def abs(self):
        return Interval(self.mig(), self.mag(), check=False)

    def contains(self, x):
        """Containment of exact values (floats or Fractions for scalars)."""
        if isinstance(x, Fraction):
            return Fraction(float(self.lo)) <= x <= Fraction(float(self.hi))
        if isinstance(x, Interval):
            return np.all((self.lo <= x.lo) & (x.hi <= self.hi))
        x = _as_float(x)
        return np.all((self.lo <= x) & (x <= self.hi))

    def contains_zero(self):
        return (self.lo <= 0) & (self.hi >= 0)

    def is_zero(self):
        return bool(np.all(self.lo == 0) and np.all(self.hi == 0))

    def intersect(self, other):
        other = as_interval(other)
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            raise DomainError("disjoint intervals")
        return Interval(lo, hi, check=False)

    def hull(self, other):
        other = as_interval(other)
        return Interval.hull_of(self, other)

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return Interval(-self.hi, -self.lo, check=False)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, CInterval):
            return NotImplemented
        other = as_interval(other)
        return _iv_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CInterval):
            return NotImplemented
        other = as_interval(other)
        return _iv_add(self, -other)

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        if isinstance(other, CInterval):
            return NotImplemented
        other = as_interval(other)
        return _iv_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CInterval):
            return NotImplemented
        other = as_interval(other)
        return _iv_div(self, other)

    def __rtruediv__(self, other):
        return as_interval(other) / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise DomainError("only non-negative integer powers")
        result = Interval(np.ones(self.shape))
        base = self
        first = True
        while k:
            if k & 1:
                result = base if first else result * base
                first = False
            k >>= 1
            if k:
                base = base.sqr()
        return result

    def sqr(self):
        a = self.abs()
        lo2, _ = _mul_bounds(a.lo, a.lo)
        _, hi2 = _mul_bounds(a.hi, a.hi)
        return Interval(np.maximum(lo2, 0.0), hi2, check=False)

    def sqrt(self):
        if np.any(self.hi < 0):
            raise DomainError("sqrt of negative interval")
        lo = np.where(self.lo <= 0, 0.0, np.maximum(_down(np.sqrt(np.maximum(self.lo, 0.0))), 0.0))
        hi = _up(np.sqrt(self.hi))
        return Interval(lo, hi, check=False)

    def exp(self):
        return iv_exp(self)

    def cos(self):
        return _sincos(self)[1]

    def sin(self):
        return _sincos(self)[0]

    def sum(self, axis=None):
        return iv_sum(self, axis=axis)

    def max(self, axis=None):
        return Interval(np.max(self.lo, axis=axis), np.max(self.hi, axis=axis), check=False)

    def min(self, axis=None):
        return Interval(np.min(self.lo, axis=axis), np.min(self.hi, axis=axis), check=False)

    def scale2(self, k):
        """Exact multiplication by 2**k (no underflow assumed)."""
        return Interval(np.ldexp(self.lo, k), np.ldexp(self.hi, k), check=False)


def as_interval(x):
    if isinstance(x, Interval):
        return x
    if isinstance(x, Fraction):
        return Interval.from_fraction(x)
    if isinstance(x, CInterval):
        raise TypeError("complex interval where a real one is required")
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        raise TypeError("complex value where a real one is required")
    return Interval(arr.astype(float))


def _iv_add(a, b):
    s_lo, e_lo = two_sum(a.lo, b.lo)
    s_hi, e_hi = two_sum(a.hi, b.hi)
    fin_lo = np.isfinite(s_lo) & np.isfinite(e_lo)
    fin_hi = np.isfinite(s_hi) & np.isfinite(e_hi)
    lo = np.where(fin_lo & (e_lo >= 0), s_lo, _down(s_lo))
    hi = np.where(fin_hi & (e_hi <= 0), s_hi, _up(s_hi))
    lo, hi = _clean(lo, hi)
    return Interval(lo, hi, check=False)


def _mul_bounds(x, y):
    """Outward bounds of the exact product of two float arrays."""
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        p, err = two_prod(x, y)
        ap = np.abs(p)
        safe = (ap < _SAFE_HI) & (ap > _SAFE_LO) & np.isfinite(err)
        safe &= (np.abs(x) < _SAFE_HI) & (np.abs(y) < _SAFE_HI)
        # 0 * inf is 0 for interval endpoints
        zero = (x == 0) | (y == 0)
        p = np.where(zero, 0.0, p)
        err = np.where(zero, 0.0, err)
        safe = safe | zero
        lo, hi = _round_pair(p, err, safe)
    return lo, hi


def _iv_mul(a, b):
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    los, his = zip(*(_mul_bounds(x, y) for x, y in pairs))
    lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
    hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
    lo, hi = _clean(lo, hi)
    return Interval(lo, hi, check=False)


def _div_bounds(x, y):
    with np.errstate(invalid="ignore", over="ignore", under="ignore", divide="ignore"):
        q = x / y
        p, err = two_prod(q, y)
        exact = (p == x) & (err == 0) & np.isfinite(q) & (np.abs(q) > _SAFE_LO) & (np.abs(q) < _SAFE_HI)
        exact |= (x == 0)
        q = np.where(x == 0, 0.0, q)
        return np.where(exact, q, _down(q)), np.where(exact, q, _up(q))


def _iv_div(a, b):
    if np.any(b.contains_zero()):
        raise DomainError("division by an interval containing zero")
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    los, his = zip(*(_div_bounds(x, y) for x, y in pairs))
    lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
    hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
    lo, hi = _clean(lo, hi)
    return Interval(lo, hi, check=False)


def iv_arith(op, x, y):
    x = as_interval(x)
    y = as_interval(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown interval operation {op!r}")


# constants ------------------------------------------------------------------

LN2 = Interval(float.fromhex("0x1.62e42fefa39efp-1"), float.fromhex("0x1.62e42fefa39f0p-1"))
PI = Interval(float.fromhex("0x1.921fb54442d18p+1"), float.fromhex("0x1.921fb54442d19p+1"))
TWO_PI = Interval(float.fromhex("0x1.921fb54442d18p+2"), float.fromhex("0x1.921fb54442d19p+2"))


def _inv_factorials(n):
    out = []
    f = 1
    for k in range(n + 1):
        if k:
            f *= k
        out.append(Interval.from_fraction(Fraction(1, f)))
    return out


_EXP_TERMS = 20
_INV_FACT = _inv_factorials(80)
# sum_{i>20} r^i/i! for |r| <= 0.36 is far below this
_EXP_REMAINDER = Interval(-1e-25, 1e-25)


def _exp_point(x):
    """Outward enclosure of e^x for a float array x (finite entries)."""
    x = _as_float(x)
    k = np.rint(x / float(LN2.lo))
    k = np.clip(k, -1100, 1100)
    r = Interval(x) - Interval(k) * LN2
    p = Interval(np.ones(x.shape))
    for i in range(_EXP_TERMS, 0, -1):
        p = 1.0 + (p * r) / float(i)
    p = p + _EXP_REMAINDER
    ki = k.astype(int)
    with np.errstate(over="ignore", under="ignore"):
        lo = np.ldexp(p.lo, ki)
        hi = np.ldexp(p.hi, ki)
    sub = hi < _TINY_NORMAL
    lo = np.where(sub, 0.0, lo)
    hi = np.where(sub, _up(hi), hi)
    return np.maximum(lo, 0.0), hi


def iv_exp(x):
    """Enclosure of exp(x); ``overflow`` is set if the upper end saturated."""
    x = as_interval(x)
    lo_arg = x.lo
    hi_arg = x.hi
    big_lo = lo_arg > _EXP_MAX
    big_hi = hi_arg > _EXP_MAX
    small_lo = lo_arg < _EXP_MIN
    small_hi = hi_arg < _EXP_MIN
    mid_lo = np.where(big_lo | small_lo, 0.0, lo_arg)
    mid_hi = np.where(big_hi | small_hi, 0.0, hi_arg)
    lo, _ = _exp_point(mid_lo)
    _, hi = _exp_point(mid_hi)
    lo = np.where(small_lo, 0.0, np.where(big_lo, np.finfo(float).max, lo))
    hi = np.where(small_hi, _ETA, np.where(big_hi, np.inf, hi))
    out = Interval(lo, hi, check=False)
    out.overflow = bool(np.any(big_hi))
    return out


def _taylor_sum(coeffs, z):
    p = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        p = c + z * p
    return p


_TRIG_TERMS = 30


def _sincos(x):
    x = as_interval(x)
    wide = ~(x.width() < 6.0) | ~np.isfinite(x.lo) | ~np.isfinite(x.hi)
    xs = Interval(np.where(wide, 0.0, x.lo), np.where(wide, 0.0, x.hi), check=False)
    k = np.rint(xs.mid() / float(TWO_PI.lo))
    r = xs - Interval(k) * TWO_PI
    r2 = r.sqr()
    n = _TRIG_TERMS
    cos_c = [_INV_FACT[2 * i] * (-1.0) ** i for i in range(n + 1)]
    sin_c = [_INV_FACT[2 * i + 1] * (-1.0) ** i for i in range(n + 1)]
    cos_p = _taylor_sum(cos_c, r2)
    sin_p = r * _taylor_sum(sin_c, r2)
    # alternating-free crude remainder |r|^(2n+2)/(2n+2)! times 2
    rem = (Interval(r2.mag()) ** (n + 1)) * _INV_FACT[2 * n + 2] * 2.0
    rem = Interval(-rem.hi, rem.hi, check=False)
    cos_p = cos_p + rem
    sin_p = sin_p + r.abs() * rem
    unit = Interval(-np.ones(x.shape), np.ones(x.shape))
    cos_p = Interval(np.maximum(cos_p.lo, -1.0), np.minimum(cos_p.hi, 1.0), check=False)
    sin_p = Interval(np.maximum(sin_p.lo, -1.0), np.minimum(sin_p.hi, 1.0), check=False)
    cos_p = Interval(np.where(wide, unit.lo, cos_p.lo), np.where(wide, unit.hi, cos_p.hi), check=False)
    sin_p = Interval(np.where(wide, unit.lo, sin_p.lo), np.where(wide, unit.hi, sin_p.hi), check=False)
    return sin_p, cos_p


def iv_cos(x):
    return _sincos(x)[1]


def iv_sin(x):
    return _sincos(x)[0]


_DECIMAL = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*$")


def iv_from_decimal(s):
    """Tightest float enclosure of a decimal literal."""
    if not isinstance(s, str) or not _DECIMAL.match(s):
        raise FormatError(f"not a finite decimal: {s!r}")
    return Interval.from_fraction(Fraction(s.strip()))


# midpoint-radius bilinear kernel -------------------------------------------

def _midrad(x):
    return x.mid(), x.rad()


def bilinear(op, x, y, nterms):
    """Enclosure of ``op(x, y)`` for a real bilinear ``op`` built from sums
    of at most ``nterms`` products (times exact powers of two)."""
    xm, xr = _midrad(x)
    ym, yr = _midrad(y)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        centre = op(xm, ym)
        ax = np.abs(xm)
        ay = np.abs(ym)
        size = op(ax, ay)
        spread = op(ax, yr) + op(xr, ay) + op(xr, yr)
        g = _gamma(nterms + 2)
        total = _upnn(spread + _upnn(g * size))
        # products that may have underflowed; exact zeros need no slack
        live = op(((ax > 0) | (xr > 0)).astype(float), ((ay > 0) | (yr > 0)).astype(float))
        total = _upnn(total * (1.0 + 2.0 * g)) + 8.0 * live * _ETA
    total = np.where(np.isnan(total), np.inf, total)
    return Interval.from_midrad(centre, total)


def iv_sum(x, axis=None):
    x = as_interval(x)
    n = x.size if axis is None else x.shape[axis]
    return bilinear(lambda a, b: np.sum(a * b, axis=axis), x,
                    Interval(np.ones(x.shape)), max(n, 1))


# complex intervals -------------------------------------------------------------

class CInterval:
    """Rectangular complex interval array ``re + i*im``."""

    __slots__ = ("re", "im")
    __array_priority__ = 101

    def __init__(self, re, im=None):
        re = as_interval(re)
        im = Interval.zeros(re.shape) if im is None else as_interval(im)
        if re.shape != im.shape:
            shape = np.broadcast_shapes(re.shape, im.shape)
            re = re.broadcast_to(shape)
            im = im.broadcast_to(shape)
        self.re = re
        self.im = im

    @classmethod
    def point(cls, z):
        z = np.asarray(z, dtype=complex)
        return cls(Interval(z.real.copy()), Interval(z.imag.copy()))

    @classmethod
    def zeros(cls, shape):
        return cls(Interval.zeros(shape), Interval.zeros(shape))

    @property
    def shape(self):
        return self.re.shape

    @property
    def ndim(self):
        return self.re.ndim

    @property
    def size(self):
        return self.re.size

    def __len__(self):
        return len(self.re)

    def __getitem__(self, idx):
        return CInterval(self.re[idx], self.im[idx])

    def reshape(self, *shape):
        return CInterval(self.re.reshape(*shape), self.im.reshape(*shape))

    @property
    def T(self):
        return CInterval(self.re.T, self.im.T)

    def transpose(self, *axes):
        return CInterval(self.re.transpose(*axes), self.im.transpose(*axes))

    def broadcast_to(self, shape):
        return CInterval(self.re.broadcast_to(shape), self.im.broadcast_to(shape))

    def put(self, idx, other):
        other = as_cinterval(other)
        return CInterval(self.re.put(idx, other.re), self.im.put(idx, other.im))

    def __repr__(self):
        return f"CInterval(re={self.re!r}, im={self.im!r})"

    def mid(self):
        return self.re.mid() + 1j * self.im.mid()

    def rad(self):
        """Upper bound of the distance from ``mid()`` to any member."""
        a = self.re.rad()
        b = self.im.rad()
        return _up(np.hypot(a, b))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return bool(self.re.contains(z.real) and self.im.contains(z.imag))

    def is_real(self):
        return self.im.is_zero()

    def abs(self):
        """Enclosure of the modulus."""
        if self.im.is_zero():
            return self.re.abs()
        if self.re.is_zero():
            return self.im.abs()
        return (self.re.sqr() + self.im.sqr()).sqrt()

    def mag(self):
        """Float upper bound of the modulus."""
        if self.im.is_zero():
            return self.re.mag()
        if self.re.is_zero():
            return self.im.mag()
        a = self.re.mag()
        b = self.im.mag()
        with np.errstate(over="ignore"):
            return _up(_up(np.hypot(a, b)) * (1.0 + 4 * _U))

    def conj(self):
        return CInterval(self.re, -self.im)

    def mul_i(self):
        return CInterval(-self.im, self.re)

    def __neg__(self):
        return CInterval(-self.re, -self.im)

    def __add__(self, other):
        other = as_cinterval(other)
        return CInterval(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_cinterval(other)
        return CInterval(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_cinterval(other) - self

    def __mul__(self, other):
        if _is_real_operand(other):
            o = as_interval(other)
            return CInterval(self.re * o, self.im * o)
        other = as_cinterval(other)
        return _cmul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_real_operand(other):
            o = as_interval(other)
            return CInterval(self.re / o, self.im / o)
        other = as_cinterval(other)
        if other.im.is_zero():
            return CInterval(self.re / other.re, self.im / other.re)
        den = other.re.sqr() + other.im.sqr()
        num = _cmul(self, other.conj())
        return CInterval(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return as_cinterval(other) / self

    def exp(self):
        e = iv_exp(self.re)
        if self.im.is_zero():
            return CInterval(e, Interval.zeros(self.shape))
        s, c = _sincos(self.im)
        return CInterval(e * c, e * s)

    def sum(self, axis=None):
        return CInterval(self.re.sum(axis), self.im.sum(axis))

    def hull(self, other):
        other = as_cinterval(other)
        return CInterval(self.re.hull(other.re), self.im.hull(other.im))


def as_cinterval(x):
    if isinstance(x, CInterval):
        return x
    if isinstance(x, Interval):
        return CInterval(x, Interval.zeros(x.shape))
    if isinstance(x, Fraction):
        return CInterval(Interval.from_fraction(x))
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        return CInterval.point(arr)
    return CInterval(Interval(arr.astype(float)))


def _is_real_operand(x):
    if isinstance(x, CInterval):
        return False
    if isinstance(x, (Interval, Fraction)):
        return True
    return not np.iscomplexobj(np.asarray(x))


def _cmul(a, b):
    if a.im.is_zero() and b.im.is_zero():
        return CInterval(a.re * b.re, Interval.zeros(np.broadcast_shapes(a.shape, b.shape)))
    re = a.re * b.re - a.im * b.im
    im = a.re * b.im + a.im * b.re
    return CInterval(re, im)


def cbilinear(op, x, y, nterms):
    """Complex version of :func:`bilinear`; zero parts are skipped."""
    x = as_cinterval(x)
    y = as_cinterval(y)
    xr0, xi0 = x.re.is_zero(), x.im.is_zero()
    yr0, yi0 = y.re.is_zero(), y.im.is_zero()

    def term(a, a0, b, b0):
        if a0 or b0:
            return None
        return bilinear(op, a, b, nterms)

    rr = term(x.re, xr0, y.re, yr0)
    ii = term(x.im, xi0, y.im, yi0)
    ri = term(x.re, xr0, y.im, yi0)
    ir = term(x.im, xi0, y.re, yr0)
    shape = op(np.zeros(x.shape), np.zeros(y.shape)).shape
    zero = Interval.zeros(shape)

    def combine(p, q, sign):
        if p is None and q is None:
            return zero
        if q is None:
            return p
        if p is None:
            return -q if sign < 0 else q
        return p - q if sign < 0 else p + q

    return CInterval(combine(rr, ii, -1), combine(ri, ir, +1))


def iv_matmul(a, b):
    """Enclosure of the matrix product of two (complex) interval arrays."""
    cplx = isinstance(a, CInterval) or isinstance(b, CInterval)
    n = a.shape[-1]
    if cplx:
        return cbilinear(np.matmul, a, b, n)
    return bilinear(np.matmul, as_interval(a), as_interval(b), n)


def iv_convolve(a, b):
    """Enclosure of the full linear convolution of two 1-D arrays."""
    n = min(a.shape[0], b.shape[0])
    op = lambda x, y: np.convolve(x, y)
    if isinstance(a, CInterval) or isinstance(b, CInterval):
        return cbilinear(op, a, b, n)
    return bilinear(op, as_interval(a), as_interval(b), n)


# upper-bound arithmetic on non-negative floats ---------------------------------

def up_matmul(a, b):
    """Rigorous upper bound of a @ b for non-negative float arrays."""
    a = _as_float(a)
    b = _as_float(b)
    n = a.shape[-1]
    with np.errstate(over="ignore", invalid="ignore"):
        p = a @ b
        p = _up(p * (1.0 + 2.0 * _gamma(n))) + (n + 1) * _ETA
    return np.where(np.isnan(p), np.inf, p)


def up_sum(a, axis=None):
    a = _as_float(a)
    n = a.size if axis is None else a.shape[axis]
    with np.errstate(over="ignore", invalid="ignore"):
        s = np.sum(a, axis=axis)
        s = _up(s * (1.0 + 2.0 * _gamma(n)))
    return s


def up_mul(a, b):
    with np.errstate(over="ignore", invalid="ignore"):
        p = _up(_as_float(a) * _as_float(b))
    return np.where(np.isnan(p), np.inf, p)


def up_add(a, b):
    with np.errstate(over="ignore", invalid="ignore"):
        return _up(_as_float(a) + _as_float(b))


def up_div(a, b):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _up(_as_float(a) / _as_float(b))
