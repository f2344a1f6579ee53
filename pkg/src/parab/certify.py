"""Radii for the contraction inequalities, steady-state data and certificates.

All comparisons are made in interval arithmetic on the stored floats, so a
certificate can be re-verified from its own numbers without recomputing any
bound.
"""

from dataclasses import dataclass, field

import numpy as np

from .bounds import w_entry, z_entry
from .errors import BasinFailure, ContractFailure, GapFailure, UsageError
from .interval import Interval, as_interval

_GROW = 1.0 + 2.0 ** -30


def _iv(x):
    return as_interval(float(x))


def check_m1(Y, Z, W, r):
    """Y + Z r + W r^2 / 2 <= r and Z + W r < 1, both in interval arithmetic."""
    Y, Z, W, r = _iv(Y), _iv(Z), _iv(W), _iv(r)
    first = Y + Z * r + W * r * r * 0.5
    second = Z + W * r
    return bool(first.hi <= r.lo) and bool(second.hi < 1.0)


def check_m1_strict(Y, Z, W, r):
    Y, Z, W, r = _iv(Y), _iv(Z), _iv(W), _iv(r)
    first = Y + Z * r + W * r * r * 0.5
    return bool(first.hi < r.lo) and bool((Z + W * r).hi < 1.0)


def _smallest_root(Y, Z, W):
    if W == 0:
        return Y / (1.0 - Z)
    disc = (1.0 - Z) ** 2 - 2.0 * Y * W
    # stable form of (1 - Z - sqrt(disc)) / W
    return 2.0 * Y / (1.0 - Z + np.sqrt(disc))


def radii_m1(Y, Z, W, r_star=np.inf, domain=None, strict=False):
    """Smallest verified radius r for one domain (floats are upper bounds of Y, Z, W)."""
    if min(Y, Z, W) < 0:
        raise UsageError("Y, Z, W must be nonnegative")
    if not Z < 1.0:
        raise ContractFailure("Z", domain)
    disc = (_iv(1.0) - _iv(Z)) ** 2 - _iv(2.0) * _iv(Y) * _iv(W)
    if W > 0 and disc.hi < 0:
        raise ContractFailure("defect too large", domain)
    if W > 0 and disc.lo <= 0:
        raise ContractFailure("defect too large", domain)
    if Y == 0 and not strict:
        r = 0.0
        if check_m1(Y, Z, W, r):
            return r
    r = float(_smallest_root(Y, Z, W))
    test = check_m1_strict if strict else check_m1
    if r == 0.0:
        r = np.nextafter(0.0, 1.0)
    for _ in range(200):
        if test(Y, Z, W, r):
            break
        r = max(r * _GROW ** 4, np.nextafter(r, np.inf))
    else:
        raise ContractFailure("radius not verifiable", domain)
    if r > r_star:
        raise ContractFailure("radius cap", domain)
    return r


def _largest_radius(Y, Z, W, r_star, strict_first=False):
    """Largest r <= r_star with Y + Zr + Wr^2/2 <= r and Z + Wr < 1 (verified)."""
    if W == 0:
        r = float(r_star)
        if not np.isfinite(r):
            raise UsageError("need a finite r_star when W = 0")
    else:
        disc = max((1.0 - Z) ** 2 - 2.0 * Y * W, 0.0)
        big = (1.0 - Z + np.sqrt(disc)) / W
        r = min(float(r_star), big, (1.0 - Z) / W)
    check = check_m1_strict if strict_first else check_m1
    for _ in range(2000):
        if check(Y, Z, W, r):
            return r
        r = r / _GROW ** 64
    raise ContractFailure("no admissible upper radius")


def _effective_Y(bounds, r, m):
    """Y^m + sum_{i<m} Z^m_i r^i + (1/2) sum_{i<m} W^m_ii (r^i)^2, rounded up."""
    acc = _iv(bounds.Y[m])
    for i in range(m):
        ri = _iv(r[i])
        acc = acc + _iv(bounds.Z[m, i]) * ri + _iv(bounds.W[m, i]) * ri * ri * 0.5
    return float(acc.hi)


def check_system(Y, Z, W, r, eta, r_star):
    """Both inequality systems for all domains, evaluated in interval arithmetic."""
    M = len(Y)
    for m in range(M):
        if not r[m] <= r_star[m]:
            return False
        first = _iv(0.0)
        second = _iv(0.0)
        for i in range(m + 1):
            ri = _iv(r[i])
            ei = _iv(eta[i])
            first = first + _iv(Z[m][i]) * ri + _iv(W[m][i]) * ri * ri * 0.5
            second = second + _iv(Z[m][i]) * ei + _iv(W[m][i]) * ei * ri
        first = first + _iv(Y[m])
        if not first.hi <= _iv(r[m]).lo:
            return False
        if not second.hi < _iv(eta[m]).lo:
            return False
    return True


def _eta_ok(Z, W, r, eta):
    M = len(r)
    for m in range(M):
        acc = _iv(0.0)
        for i in range(m + 1):
            acc = acc + _iv(Z[m, i]) * _iv(eta[i]) + _iv(W[m, i]) * _iv(eta[i]) * _iv(r[i])
        if not acc.hi < _iv(eta[m]).lo:
            return False
    return True


def find_eta(Z, W, r):
    """Weights eta with sum_i (Z^m_i + W^m_ii r^i) eta^i < eta^m for every m."""
    M = len(r)
    A = Z + W * np.asarray(r)[None, :]
    eta = np.ones(M)
    if _eta_ok(Z, W, r, eta):
        return eta
    v = np.ones(M)
    for _ in range(20):
        w = A @ v
        s = np.max(w)
        if not s > 0:
            break
        v = w / s
    eta = np.maximum(v, 1e-3)
    if _eta_ok(Z, W, r, eta):
        return eta
    # forward pass: eta^m = 1 + sum_{i<m} A_mi eta^i / (1 - A_mm) is always strict
    eta = np.ones(M)
    for m in range(M):
        if not A[m, m] < 1:
            raise ContractFailure("no contraction weight", m + 1)
        eta[m] = 1.0 + float(A[m, :m] @ eta[:m]) / (1.0 - A[m, m]) * _GROW ** 8
    if _eta_ok(Z, W, r, eta):
        return eta
    raise ContractFailure("contraction weights not verifiable")


def find_radii(bounds, maximize=False):
    """(r, eta) verifying both inequality systems, by forward substitution over domains."""
    M = bounds.M
    r = np.zeros(M)
    for m in range(M):
        Yeff = _effective_Y(bounds, r, m)
        Z, W = float(bounds.Z[m, m]), float(bounds.W[m, m])
        r[m] = radii_m1(Yeff, Z, W, bounds.r_star[m], domain=m + 1)
        if maximize:
            r[m] = max(r[m], _largest_radius(Yeff, Z, W, bounds.r_star[m]))
    eta = find_eta(bounds.Z, bounds.W, r)
    if not check_system(bounds.Y, bounds.Z, bounds.W, r, eta, bounds.r_star):
        raise ContractFailure("final recheck failed")
    return r, eta


# steady states -------------------------------------------------------------

def steady_state_cert(Y_inf, Z, W, r_star, Y_stat=None):
    """r_min (strict), r_max and r_min_stat for the infinite step."""
    r_min = radii_m1(Y_inf, Z, W, r_star, strict=True)
    r_max = _largest_radius(Y_inf, Z, W, r_star)
    if not r_max > r_min:
        raise ContractFailure("no room between r_min and r_max")
    r_stat = radii_m1(Y_stat, Z, W, r_star) if Y_stat is not None else r_min
    return {"r_min": r_min, "r_max": r_max, "r_min_stat": min(r_stat, r_min)}


def _basin_ok(Z, W, r_min, r_max, qnorm, eps):
    c = _iv(1.0) - (_iv(Z) + _iv(W) * _iv(r_min))
    room = _iv(r_max) - _iv(r_min)
    e = _iv(eps)
    if c.lo <= 0:
        return False
    if W == 0:
        delta = _iv(qnorm) * e / c
        return bool(delta.hi <= room.lo)
    disc = c * c - _iv(4.0) * _iv(W) * _iv(qnorm) * e
    if not disc.lo > 0:
        return False
    delta = (c - disc.sqrt()) / (_iv(2.0) * _iv(W))
    return bool(delta.hi <= room.lo)


def basin_radius(Z, W, r_min, r_max, qnorm):
    """Largest verified epsilon (to 20 bisection steps) for the basin conditions."""
    c = 1.0 - (Z + W * r_min)
    if not c > 0:
        raise BasinFailure("Z + W r_min >= 1")
    room = r_max - r_min
    guess = c * room / qnorm
    if W > 0:
        guess = max(guess, c * c / (4.0 * W * qnorm))
    hi = guess * 2.0
    lo = None
    eps = hi
    for _ in range(1100):
        if _basin_ok(Z, W, r_min, r_max, qnorm, eps):
            lo = eps
            break
        hi = eps
        eps = eps / 2.0
        if eps == 0.0:
            break
    if lo is None:
        raise BasinFailure("no positive basin radius verified")
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if _basin_ok(Z, W, r_min, r_max, qnorm, mid):
            lo = mid
        else:
            hi = mid
    return lo


def gap_bound(problem, ing, a, r, r_star):
    """Upper bound of the resolvent condition at shift a (< 1 means no spectrum in [a, 0])."""
    sh = ing.shifted(a) if a != 0 else ing
    A = sh.op.Q_abs_hi()
    Z = z_entry(sh, sh, A, None, 1, 1)
    W = w_entry(problem, sh, A, None, 1, 1, r_star)
    return float((_iv(Z) + _iv(W) * _iv(r)).hi)


def _max_re(ing):
    op = ing.op
    blk = float(np.max(op.Lambda_fin.re.hi)) if len(op.n) else -np.inf
    return max(blk, float(op.sup_tail_re(op.N_L).hi))


def spectral_gap(problem, ing, r, r_star, scan_grid=None, refine=20):
    """Most negative verified a with gap_bound < 1, refined by bisection."""
    top = _max_re(ing)
    if not top < 0:
        raise GapFailure("linear part is not strictly stable")
    if gap_bound(problem, ing, 0.0, r, r_star) >= 1:
        raise GapFailure("resolvent bound is not below 1 at a = 0")
    if scan_grid is None:
        scan_grid = np.linspace(0.0, top, 34)[1:-1]
    good = 0.0
    bad = top
    for a in sorted((float(x) for x in scan_grid if top < x < 0), reverse=True):
        if gap_bound(problem, ing, a, r, r_star) < 1:
            good = a
        else:
            bad = a
            break
    for _ in range(refine):
        mid = 0.5 * (good + bad)
        if not top < mid < 0:
            break
        if gap_bound(problem, ing, mid, r, r_star) < 1:
            good = mid
        else:
            bad = mid
    if good == 0.0:
        raise GapFailure("no negative shift verified")
    return good


# certificates -----------------------------------------------------------------

@dataclass
class Certificate:
    r: list
    eta: list
    Y: list
    Z: list
    W: list
    r_star: list
    steady: dict = None
    meta: dict = field(default_factory=dict)

    @property
    def global_error(self):
        return max(self.r) if self.r else 0.0

    def verify(self):
        """Re-check both inequality systems (and the steady-state block) from the stored numbers."""
        if not check_system(self.Y, self.Z, self.W, self.r, self.eta, self.r_star):
            return False
        if self.steady:
            s = self.steady
            M = len(self.Y)
            Zi, Wi = self.Z[M - 1][M - 1], self.W[M - 1][M - 1]
            Yinf = s["Y_inf"]
            if not check_m1_strict(Yinf, Zi, Wi, s["r_min"]):
                return False
            if not check_m1(Yinf, Zi, Wi, s["r_max"]) or s["r_max"] > self.r_star[M - 1]:
                return False
            if s.get("Y_stat") is not None and not check_m1(s["Y_stat"], Zi, Wi, s["r_min_stat"]):
                return False
            if s.get("epsilon") and not _basin_ok(Zi, Wi, s["r_min"], s["r_max"], s["qnorm"], s["epsilon"]):
                return False
        return True


def certify(bounds, problem=None, maximize=False, gap=True, scan_grid=None, meta=None):
    """Radii, weights and (for an infinite last step) the steady-state block."""
    r, eta = find_radii(bounds, maximize=maximize)
    steady = None
    if bounds.infinite:
        M = bounds.M
        Zi, Wi = float(bounds.Z[M - 1, M - 1]), float(bounds.W[M - 1, M - 1])
        Yinf = _effective_Y(bounds, r, M - 1)
        s = steady_state_cert(Yinf, Zi, Wi, bounds.r_star[M - 1], bounds.Y_stat)
        eps = basin_radius(Zi, Wi, s["r_min"], s["r_max"], bounds.qnorm)
        steady = dict(s, Y_inf=Yinf, Y_stat=bounds.Y_stat, qnorm=bounds.qnorm, epsilon=eps)
        if gap and problem is not None:
            steady["alpha"] = spectral_gap(problem, bounds.ingredients[-1], s["r_min_stat"],
                                           bounds.r_star[M - 1], scan_grid)
    cert = Certificate([float(x) for x in r], [float(x) for x in eta], [float(y) for y in bounds.Y],
                       bounds.Z.tolist(), bounds.W.tolist(), [float(x) for x in bounds.r_star], steady,
                       dict(meta or {}))
    if not cert.verify():
        raise ContractFailure("certificate failed its own check")
    return cert
