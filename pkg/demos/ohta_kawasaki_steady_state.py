"""
Ohta-Kawasaki: integrating to t = infinity
==========================================

The trajectory from the standard initial data lingers on a plateau, moves
through a fast transition and settles on a stable equilibrium.  The grid
planner sees this, and the proof starts at t = 20 and closes with the
infinite step.
"""

import numpy as np

from parab.grid import optimize_grid
from parab.problem import ohta_kawasaki
from parab.run import RunConfig, prove_solution, solve

p, u0 = ohta_kawasaki()

# internal time is t / 128; plan [0, 40] with the surrogate contraction
plan = optimize_grid(p, u0, 40 / 128, 80, N=16)
print("grid plan from t = 0: %d subdomains" % plan.M)
for t0, length in zip(np.asarray(plan.grid[:-1]) * 128, plan.lengths() * 128):
    print("  t = %6.2f  length %.3f %s" % (t0, length, "#" * min(int(2 + 10 * length), 60)))

# relax to t = 20, prove [20, 30] and the steady state beyond
cfg = RunConfig("ohta_kawasaki", t_start=20, tau=30, M=20, N_u=32, K=12, to_infinity=True)
_, sol, _ = solve(cfg)
cert, _ = prove_solution(sol)
s = cert.steady
print("error on [20, 30]: %.2e" % max(cert.r[:-1]))
print("distance to the steady state: %.2e" % s["r_min_stat"])
print("basin radius %.2e, spectral gap %.3f (internal time)" % (s["epsilon"], s["alpha"]))
