"""Choosing the time subdivision and the per-domain Chebyshev orders.

Everything here is float arithmetic: the plans only steer the proof, the
rigorous bounds are recomputed from scratch afterwards.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SolverError, UsageError
from .linear import _ordered_eig
from .sequences import mode_weights
from .solver import SpectralModel, _clean_symmetry, _initial_mid, _solve_piece, etdrk4
from .chebyshev import eval_matrix_float, interp_values_float, cheb_derivative_float

log = logging.getLogger(__name__)

TARGET_Z = 0.2
SHRUNK_Z = 0.05
COND_LIMIT = 1e6
MAX_ORDER = 64
RESOLUTION_BITS = 14


@dataclass
class GridPlan:
    grid: list
    orders: list
    interp_orders: list
    surrogate_diag: list
    y_threshold: float = None
    surrogate_y: list = field(default_factory=list)
    complete: bool = True        # False when tau_final was not reached with the allowed domains
    refine: list = field(default_factory=list)   # 1-based domains whose order hit the cap

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if len(g) < 2 or np.any(np.diff(g) <= 0):
            raise UsageError("grid must be strictly increasing")
        if any(k < 1 or k > MAX_ORDER for k in self.orders):
            raise UsageError(f"orders must lie in [1, {MAX_ORDER}]")
        if not np.all(np.isfinite(self.surrogate_diag)):
            raise UsageError("surrogate values must be finite")

    @property
    def M(self):
        return len(self.grid) - 1

    def lengths(self):
        return np.diff(np.asarray(self.grid, dtype=float))

    def to_dict(self):
        return {"grid": [float(t) for t in self.grid], "orders": [int(k) for k in self.orders],
                "interp_orders": [int(k) for k in self.interp_orders],
                "surrogate_diag": [float(z) for z in self.surrogate_diag],
                "surrogate_y": [float(y) for y in self.surrogate_y],
                "y_threshold": self.y_threshold, "complete": self.complete, "refine": list(self.refine)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["grid"], d["orders"], d["interp_orders"], d["surrogate_diag"], d.get("y_threshold"),
                   d.get("surrogate_y", []), d.get("complete", True), d.get("refine", []))


class CoarseTrajectory:
    """Float states on a uniform mesh of [t0, t0 + span], linearly interpolated."""

    def __init__(self, times, states):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=complex)

    def __call__(self, t):
        t = float(np.clip(t, self.times[0], self.times[-1]))
        h = self.times[1] - self.times[0]
        k = min(int((t - self.times[0]) / h), len(self.times) - 2)
        a = (t - self.times[k]) / h
        return (1 - a) * self.states[k] + a * self.states[k + 1]


def coarse_trajectory(problem, u0, span, N, steps=1 << RESOLUTION_BITS, start=None, substeps=1):
    """ETDRK4 states at ``steps`` + 1 equispaced times in [0, span]."""
    model = SpectralModel(problem, N)
    u = _initial_mid(u0, problem.symmetry, N) if start is None else np.asarray(start, dtype=complex)
    h = span / steps
    states = [u]
    for _ in range(steps):
        u = etdrk4(model, u, h, substeps)
        states.append(u)
    states = np.array(states)
    if problem.symmetry != "none":
        states = _clean_symmetry(states, problem.symmetry)
    return CoarseTrajectory(np.linspace(0.0, span, steps + 1), states)


def _btilde(re, delta):
    # int_0^delta exp(re s) ds
    x = re * delta
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, delta * (1 + x / 2), delta * np.expm1(safe) / safe)


def _colnorm(X, w):
    return float(np.max((w @ np.abs(X)) / w))


class _Surrogates:
    """Float versions of the diagonal contraction and defect bounds.

    Both are restricted to the Galerkin block |n| <= N: the tail terms of
    the rigorous bounds hardly depend on the step length, so they carry no
    information about where to put the grid points or which order to use.
    """

    def __init__(self, problem, N, nu, n_samples=5):
        self.model = SpectralModel(problem, N)
        self.w = mode_weights(problem.symmetry, self.model.n, nu).mid()
        self.s = 0.5 * (1 - np.cos(np.pi * np.arange(n_samples) / (n_samples - 1)))

    def _linear(self, states):
        """Float eigenbasis of the block built from the averaged kernels."""
        N = self.model.N
        ks = [np.mean(k, axis=0) for k in zip(*[self.model.kernels(u, N) for u in states])]
        A = self.model.block_from_kernels(ks)
        lam, Q = _ordered_eig(A, self.model.n)
        Qi = np.linalg.inv(Q)
        cond = _colnorm(Qi, self.w) * _colnorm(Q, self.w)
        return lam, Q, Qi, A, cond

    def diag_z(self, traj, t0, t1):
        """Surrogate Z_m^(m) on [t0, t1] and the conditioning estimate of Q."""
        states = [traj(t0 + (t1 - t0) * s) for s in self.s]
        lam, Q, Qi, A, cond = self._linear(states)
        dev = np.zeros((self.model.nm, self.model.nm))
        for u in states:
            dev = np.maximum(dev, np.abs(Qi @ (self.model.jacobian(u) - A)))
        X = np.abs(Q) @ (_btilde(lam.real, t1 - t0)[:, None] * dev)
        return _colnorm(X, self.w), cond

    def defect_y(self, U, t0, t1):
        """Surrogate Y on one piece from node values U (K+1, nm) on [t0, t1]."""
        K = U.shape[0] - 1
        length = t1 - t0
        pc = interp_values_float(K) @ U
        s = np.linspace(-1, 1, 4 * K + 5)
        V = eval_matrix_float(K, s)
        vals = V @ pc
        der = V @ cheb_derivative_float(pc, length)
        lam, Q, Qi, _, _ = self._linear([U[0], U[-1]])
        worst = np.zeros(self.model.nm)
        for u, du in zip(vals, der):
            worst = np.maximum(worst, np.abs(Qi @ (self.model.rhs(u) - du)))
        y = np.abs(Q) @ (_btilde(lam.real, length) * worst)
        return float(self.w @ y)


def _z_target(cond, target):
    return SHRUNK_Z if cond > COND_LIMIT and target > SHRUNK_Z else target


def optimize_grid(problem, u0, tau_final, M, coarse=None, N=16, nu=None, target=TARGET_Z, t_start=0.0,
                  start=None):
    """Greedy equidistribution of the surrogate diagonal contraction.

    Marches from t_start, extending each subdomain along a mesh of spacing
    (tau_final - t_start) / 2^14 until the surrogate Z_m^(m) reaches the target
    (shrunk where the eigenbasis is badly conditioned).  Domains needed fewer
    than M are simply not used; if M domains do not reach tau_final the last
    one is stretched and the plan is flagged incomplete.  ``start`` replaces
    the initial coefficients (e.g. a relaxed state at t_start).
    """
    span = float(tau_final) - float(t_start)
    if not span > 0 or M < 1:
        raise UsageError("need tau_final > t_start and M >= 1")
    nu = u0.finite.nu if nu is None else nu
    if coarse is None:
        coarse = coarse_trajectory(problem, u0, span, N, start=start)
    traj = lambda t: coarse(t - t_start)
    sur = _Surrogates(problem, N, nu)
    units = 1 << RESOLUTION_BITS
    h = span / units
    grid, zs = [float(t_start)], []
    pos = 0
    forced = False
    while pos < units and len(zs) < M:
        t0 = t_start + pos * h
        cache = {}

        def z_at(k):
            if k not in cache:
                z, cond = sur.diag_z(traj, t0, t0 + k * h)
                cache[k] = (z, _z_target(cond, target))
            return cache[k]

        left = units - pos
        if len(zs) == M - 1:
            k = left
            z, zt = z_at(k)
            forced = z > zt
        else:
            # doubling, then bisection on the integer mesh
            k = 1
            while k < left and z_at(min(2 * k, left))[0] <= z_at(min(2 * k, left))[1]:
                k = min(2 * k, left)
            if k < left:
                lo, hi = k, min(2 * k, left)
                if z_at(lo)[0] > z_at(lo)[1]:
                    hi = lo
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if z_at(mid)[0] <= z_at(mid)[1]:
                        lo = mid
                    else:
                        hi = mid
                k = lo
        pos += k
        grid.append(t_start + pos * h if pos < units else float(tau_final))
        zs.append(z_at(k)[0])
    complete = not forced
    if not complete:
        log.warning("grid plan is best effort: last surrogate Z %.3g with M = %d", zs[-1], len(zs))
    return GridPlan(grid, [1] * len(zs), [1] * len(zs), zs, complete=complete)


def select_orders(plan, problem, u0, y_threshold, N=16, nu=None, start=None, k_max=MAX_ORDER):
    """Smallest K per domain whose surrogate defect is below ``y_threshold``.

    Pieces are solved in sequence so every domain starts from the previous
    endpoint.  Orders are searched by doubling then bisection; domains that
    need more than ``k_max`` keep k_max and are listed in ``plan.refine``.
    The nonlinearity is composed exactly, so its interpolation order is the
    polynomial degree times K.
    """
    nu = u0.finite.nu if nu is None else nu
    sur = _Surrogates(problem, N, nu)
    model = sur.model
    u = _initial_mid(u0, problem.symmetry, N) if start is None else np.asarray(start, dtype=complex)
    grid = [float(t) for t in plan.grid]
    orders, ys, refine = [], [], []
    for m in range(len(grid) - 1):
        t0, t1 = grid[m], grid[m + 1]
        if not np.isfinite(t1):
            break
        cache = {}

        def attempt(K):
            if K not in cache:
                try:
                    U, _ = _solve_piece(model, u, t0, t1, K, m + 1)
                    cache[K] = (sur.defect_y(U, t0, t1), U)
                except SolverError:
                    cache[K] = (np.inf, None)
            return cache[K]

        K = 1
        while attempt(K)[0] >= y_threshold and K < k_max:
            K = min(2 * K, k_max)
        if attempt(K)[0] < y_threshold:
            lo, hi = K // 2, K
            while hi - lo > 1 and lo >= 1:
                mid = (lo + hi) // 2
                if attempt(mid)[0] < y_threshold:
                    hi = mid
                else:
                    lo = mid
            K = hi
        else:
            refine.append(m + 1)
            log.warning("domain %d needs K > %d for Y below %.3g", m + 1, k_max, y_threshold)
        y, U = attempt(K)
        if U is None:
            raise SolverError(f"no order up to {k_max} solves subdomain {m + 1}", m + 1)
        orders.append(K)
        ys.append(y)
        u = U[-1]
    deg = max(problem.degree(), 1)
    nfin = len(orders)
    extra = len(plan.surrogate_diag) - nfin
    return replace(plan, orders=orders + [1] * extra, interp_orders=[deg * k for k in orders] + [1] * extra,
                   surrogate_y=ys, y_threshold=float(y_threshold), refine=refine)
