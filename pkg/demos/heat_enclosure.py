"""
Heat equation: a proof you can check by hand
============================================

u_t = u_xx with u(0) = cos x has the exact solution exp(-t) cos x, so the
certified radius can be compared with the true error directly.
"""

import numpy as np

from parab.pipeline import prove
from parab.problem import heat
from parab.solver import integrate_numeric

p, u0 = heat()

# four subdomains of [0, 1], Chebyshev order 18 in time, modes |n| <= 4
sol = integrate_numeric(p, u0, np.linspace(0, 1, 5), 4, 18)
cert, bounds = prove(p, sol)

print("radius per subdomain:", ["%.2e" % r for r in cert.r])

# the true error stays inside the certified radius
t = np.linspace(0, 1, 11)
x = np.linspace(0, 2 * np.pi, 9)
err = max(abs(sol.eval_physical(s, x) - np.exp(-s) * np.cos(x)).max() for s in t)
print("largest observed error %.2e <= %.2e" % (err, cert.global_error))
