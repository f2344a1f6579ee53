"""End-to-end proof of an approximate solution: operators, bounds, radii."""

import logging
import time

import numpy as np

from .bounds import compute_bounds
from .certify import certify
from .errors import DiagonalizationError
from .linear import build_linear_op
from .solver import kernel_averages

log = logging.getLogger(__name__)


def linear_ops(problem, sol, N_L):
    """One linear operator per subdomain, built from the time-averaged kernels."""
    ops = []
    for m in range(sol.M):
        t0, t1 = sol.domain(m)
        try:
            ops.append(build_linear_op(problem, kernel_averages(problem, sol, m), N_L, sol.nu, t1 - t0))
        except DiagonalizationError as exc:
            exc.domain = m + 1
            raise
    return ops


def prove(problem, sol, N_L=None, r_star=1e-4, maximize=False, gap=True, meta=None, threads=1):
    """Certificate for ``sol`` (raises ContractFailure / StabilityError on failure)."""
    N_L = sol.N if N_L is None else int(N_L)
    start = time.perf_counter()
    ops = linear_ops(problem, sol, N_L)
    bounds = compute_bounds(problem, sol, ops, r_star, threads=threads)
    log.info("bounds done in %.1fs: max Y %.3g, max diag Z %.3g", time.perf_counter() - start,
             float(np.max(bounds.Y)), float(np.max(np.diag(bounds.Z))))
    info = {"N_u": sol.N, "N_L": N_L, "nu": sol.nu, "grid": [float(t) for t in sol.grid],
            "orders": [int(k) for k in sol.orders()], "problem": problem.name}
    info.update(meta or {})
    cert = certify(bounds, problem, maximize=maximize, gap=gap, meta=info)
    cert.meta["seconds"] = round(time.perf_counter() - start, 3)
    return cert, bounds
