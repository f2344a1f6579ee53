"""
Kuramoto-Sivashinsky with an adaptive grid
==========================================

alpha = 0.127, odd data.  The planner picks the subdomains and the orders;
the error is reported for the variable v and for the physical u = -2 sqrt(alpha) v.
"""

import numpy as np

from parab.run import RunConfig, physical_error, prove_solution, solve

alpha = 0.127
cfg = RunConfig("kuramoto_sivashinsky", params={"alpha": alpha}, tau=0.3 / alpha, grid="adaptive", K="auto")
p, sol, manifest = solve(cfg)

lengths = np.diff(sol.grid) / alpha ** 2
print("subdomains (physical lengths):", np.round(lengths, 3))
print("orders:", sol.orders())

cert, _ = prove_solution(sol)
print("error in v: %.2e   error in u: %.2e" % (cert.global_error, physical_error(p, cert.global_error)))
