"""
Swift-Hohenberg on [0, 0.5]
===========================

alpha = 5 on a domain of length 6 pi, twenty equal subdomains, order 5 in
time and 24 Fourier modes.  Prints the contraction data per subdomain.
"""

import numpy as np

from parab.run import RunConfig, prove_solution, solve

cfg = RunConfig("swift_hohenberg", tau=0.5, M=20, N_u=24, K=5)
p, sol, manifest = solve(cfg)
cert, bounds = prove_solution(sol, threads=4)

# Y is the defect, Z the linear part, W the Lipschitz part
print(" m        Y          Z_mm       W_mm        r")
for m in range(sol.M):
    print("%2d  %.3e  %.3e  %.3e  %.3e" % (m + 1, bounds.Y[m], bounds.Z[m, m], bounds.W[m, m], cert.r[m]))
print("global error %.3e after %.0f s" % (cert.global_error, cert.meta["seconds"]))

# u(tau, x) on the physical domain
y = np.linspace(0, 2 * np.pi, 7)
print("u(0.5, x) =", np.round(sol.eval_physical(sol.grid[-1], y), 4))
