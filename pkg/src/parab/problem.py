"""PDE family u_t = (-1)^(J+1) D^(2J) u + sum_j D^j g_j(u) on the 2*pi torus.

Physical problems are rescaled onto the 2*pi torus with a normalized leading
term.  The scale factors relate internal and physical variables as

    y = space_scale * x,   t_int = time_scale * t,   u = amplitude * v.
"""

from fractions import Fraction

import numpy as np

from .errors import ConfigError, UsageError
from .interval import CInterval, Interval, as_interval
from .sequences import FourierSeq, Poly, TailBoundedSeq, apply_poly, check_symmetry


def _exact(x, name="parameter"):
    """Exact rational from an int, Fraction or decimal string/float literal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ConfigError(f"{name} must be finite")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse {name}={x!r}") from None
    raise ConfigError(f"unsupported type for {name}: {type(x).__name__}")


def _poly(coeffs):
    return Poly([Interval.from_fraction(Fraction(c)) for c in coeffs])


class PdeProblem:
    __slots__ = ("J", "gs", "symmetry", "name", "space_scale", "time_scale", "amplitude",
                 "params")

    def __init__(self, J, gs, symmetry="none", name="custom", space_scale=1.0, time_scale=1.0,
                 amplitude=1.0, params=None):
        if int(J) != J or J < 1:
            raise ConfigError("J must be a positive integer")
        J = int(J)
        gs = [g if isinstance(g, Poly) else Poly(g) for g in gs]
        if len(gs) != 2 * J:
            raise ConfigError(f"expected {2 * J} nonlinearities, got {len(gs)}")
        try:
            check_symmetry(symmetry)
        except UsageError as exc:
            raise ConfigError(str(exc)) from None
        self.J = J
        self.gs = gs
        self.symmetry = symmetry
        self.name = name
        self.space_scale = as_interval(space_scale)
        self.time_scale = as_interval(time_scale)
        self.amplitude = as_interval(amplitude)
        self.params = dict(params or {})
        _check_parity(self)

    @property
    def order(self):
        return 2 * self.J

    def active_orders(self):
        """Orders j whose nonlinearity contributes to F (nonconstant g_j, or j = 0)."""
        return [j for j, g in enumerate(self.gs) if g.degree > 0 or (j == 0 and not g.is_zero())]

    def degree(self):
        return max(g.degree for g in self.gs)

    def gs_float(self):
        """Midpoint coefficient arrays (low to high) for the numerical solver."""
        return [g.mid() for g in self.gs]

    def __repr__(self):
        return f"PdeProblem({self.name}, J={self.J}, symmetry={self.symmetry})"


def _check_parity(p):
    """Reject nonlinearities that would break the declared symmetry subspace."""
    if p.symmetry == "none":
        return
    for j, g in enumerate(p.gs):
        if j > 0 and g.degree == 0:
            continue  # D^j of a constant vanishes
        par = g.parity()
        if par == "zero":
            continue
        if p.symmetry == "even":
            ok = j % 2 == 0
        else:
            ok = par == ("odd" if j % 2 == 0 else "even")
        if not ok:
            raise ConfigError(f"g_{j} does not preserve {p.symmetry} symmetry")


class InitialData:
    """Initial condition as a tail-bounded sequence in the internal variables."""

    __slots__ = ("seq",)

    def __init__(self, seq, problem=None):
        if isinstance(seq, FourierSeq):
            seq = TailBoundedSeq(seq, 0.0)
        if float(seq.tail_norm.lo) < 0:
            raise ConfigError("tail bound must be nonnegative")
        if problem is not None and seq.sym != problem.symmetry:
            raise ConfigError(f"initial data symmetry {seq.sym} != problem symmetry {problem.symmetry}")
        self.seq = seq

    @property
    def finite(self):
        return self.seq.finite

    @property
    def eps_in(self):
        return self.seq.tail_norm

    @property
    def N(self):
        return self.seq.finite.N

    @classmethod
    def from_modes(cls, modes, nu, sym, problem=None, tail=0.0):
        """Build from {n: coefficient} with exact rational or decimal-string entries."""
        N = max(modes) if modes else 0
        if sym == "odd":
            N = max(N, 1)
        idx = range(1, N + 1) if sym == "odd" else range(0, N + 1) if sym == "even" else range(-N, N + 1)
        re_lo, re_hi, im_lo, im_hi = [], [], [], []
        for n in idx:
            c = modes.get(n, 0)
            if isinstance(c, complex):
                re, im = Interval.from_fraction(_exact(c.real)), Interval.from_fraction(_exact(c.imag))
            elif isinstance(c, tuple):
                re, im = Interval.from_fraction(_exact(c[0])), Interval.from_fraction(_exact(c[1]))
            else:
                re, im = Interval.from_fraction(_exact(c)), Interval(0.0)
            re_lo.append(float(re.lo)); re_hi.append(float(re.hi))
            im_lo.append(float(im.lo)); im_hi.append(float(im.hi))
        coeffs = CInterval(Interval(np.array(re_lo), np.array(re_hi)),
                           Interval(np.array(im_lo), np.array(im_hi)))
        return cls(TailBoundedSeq(FourierSeq(coeffs, nu, sym), tail), problem)

    def __repr__(self):
        return f"InitialData(N={self.N}, sym={self.seq.sym}, eps_in={float(self.eps_in.hi):.3g})"


# F and DF ----------------------------------------------------------------

def linear_part(p, u):
    """(-1)^(J+1) D^(2J) u, which is -n^(2J) u mode by mode."""
    d = u.derivative(2 * p.J)
    return d if p.J % 2 else -d


def nonlinear_part(p, u):
    """sum_j D^j g_j(u); works for FourierSeq and space-time sequences."""
    total = None
    for j in p.active_orders():
        term = apply_poly(p.gs[j], u)
        if j:
            term = term.derivative(j)
        total = term if total is None else total + term
    return total


def rhs_F(p, u):
    lin = linear_part(p, u)
    nl = nonlinear_part(p, u)
    return lin if nl is None else lin + nl


def jacobian_row_data(p, u):
    """Convolution kernels g_j'(u), j = 0..2J-1, of DF(u)."""
    return [apply_poly(g.derivative(), u) for g in p.gs]


# presets -----------------------------------------------------------------

def swift_hohenberg(alpha=5, L_over_pi=6, nu=1.05):
    """u_t = -(d_xx + 1)^2 u + alpha u - u^3 on the torus of length L.

    With c = 2 pi / L and t_int = c^4 t the internal form is
    u_t = -D^4 u + D^2(-2 c^-2 u) + c^-4((alpha - 1) u - u^3).
    Initial data 0.4 cos(2 pi x / L) - 0.3 cos(4 pi x / L).
    """
    a = _exact(alpha, "alpha")
    lp = _exact(L_over_pi, "L/pi")
    if lp <= 0:
        raise ConfigError("L must be positive")
    c = Fraction(2) / lp
    g2 = _poly([0, -2 / c ** 2])
    g0 = _poly([0, (a - 1) / c ** 4, 0, -1 / c ** 4])
    p = PdeProblem(2, [g0, _poly([0]), g2, _poly([0])], "even", "swift_hohenberg",
                   space_scale=Interval.from_fraction(c), time_scale=Interval.from_fraction(c ** 4),
                   params={"alpha": str(a), "L_over_pi": str(lp)})
    u0 = InitialData.from_modes({1: Fraction(2, 10), 2: Fraction(-15, 100)}, nu, "even", p)
    return p, u0


def ohta_kawasaki(gamma_sq=8, sigma="0.2", mass="0.1", L_over_pi=2, nu=1.05):
    """Neumann problem u_t = -gamma^-2 u_xxxx - (u - u^3)_xx - sigma (u - m) on [0, L].

    The even extension lives on a torus of length 2L, so c = pi / L.  With
    t_int = c^4 t / gamma^2 the internal nonlinearities are
    g_2(u) = (gamma^2 / c^2)(u^3 - u) and g_0(u) = -(gamma^2 sigma / c^4)(u - m).
    Initial data m + 0.2 cos(2 pi x / L) + 0.2 cos(4 pi x / L).
    """
    gs = _exact(gamma_sq, "gamma^2")
    s = _exact(sigma, "sigma")
    m = _exact(mass, "m")
    lp = _exact(L_over_pi, "L/pi")
    if gs <= 0 or s < 0 or lp <= 0:
        raise ConfigError("ohta_kawasaki needs gamma^2 > 0, sigma >= 0, L > 0")
    c = Fraction(1) / lp
    k2 = gs / c ** 2
    k0 = gs * s / c ** 4
    g2 = _poly([0, -k2, 0, k2])
    g0 = _poly([k0 * m, -k0])
    p = PdeProblem(2, [g0, _poly([0]), g2, _poly([0])], "even", "ohta_kawasaki",
                   space_scale=Interval.from_fraction(c), time_scale=Interval.from_fraction(c ** 4 / gs),
                   params={"gamma_sq": str(gs), "sigma": str(s), "m": str(m), "L_over_pi": str(lp)})
    # cos(2 pi x / L) = cos(2 y) on the doubled domain
    u0 = InitialData.from_modes({0: m, 2: Fraction(1, 10), 4: Fraction(1, 10)}, nu, "even", p)
    return p, u0


def kuramoto_sivashinsky(alpha="0.127", nu=1.05):
    """u_t = -u_xxxx - u_xx - (u^2)_x / 2 with odd data.

    Through u = -2 sqrt(alpha) v, t = s / alpha, x = y / sqrt(alpha) this becomes
    v_s = -alpha v'''' - v'' + 2 v v' on the 2 pi torus; the further change
    s_int = alpha s normalizes the leading term:
    v_t = -D^4 v + D^2(-v / alpha) + D(v^2 / alpha).
    The physical period is 2 pi / sqrt(alpha).
    """
    a = _exact(alpha, "alpha")
    if a <= 0:
        raise ConfigError("alpha must be positive")
    g2 = _poly([0, -1 / a])
    g1 = _poly([0, 0, 1 / a])
    sa = Interval.from_fraction(a).sqrt()
    p = PdeProblem(2, [_poly([0]), g1, g2, _poly([0])], "odd", "kuramoto_sivashinsky",
                   space_scale=sa, time_scale=Interval.from_fraction(a * a), amplitude=-(sa * 2.0),
                   params={"alpha": str(a)})
    # sin y - 1/2 sin 2y in v; odd storage keeps i * Im parts
    u0 = InitialData.from_modes({1: (0, Fraction(-1, 2)), 2: (0, Fraction(1, 4))}, nu, "odd", p)
    return p, u0


def heat(nu=1.05):
    """u_t = u_xx with u(0) = cos x."""
    p = PdeProblem(1, [_poly([0]), _poly([0])], "even", "heat")
    u0 = InitialData.from_modes({1: Fraction(1, 2)}, nu, "even", p)
    return p, u0


PRESETS = {
    "swift_hohenberg": swift_hohenberg,
    "ohta_kawasaki": ohta_kawasaki,
    "kuramoto_sivashinsky": kuramoto_sivashinsky,
    "heat": heat,
}


def preset(name, **kwargs):
    try:
        fn = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        return fn(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
