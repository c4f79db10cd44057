"""
Symmetric and other normalizations
==================================

f(D^-a A D^-(1-a)) x is obtained from any of the P-based solvers by
rescaling the seed with D^a and the result with D^-a.
"""

# %%
import numpy as np
from scipy import linalg

from chebyprop.kernels import Kernel
from chebyprop.solvers import general_gp_matrix, general_gp_vector
from chebyprop.synthetic import grid

g = grid(4, 5)
d = g.degrees.astype(float)
S = g.to_dense() / np.sqrt(np.outer(d, d))
x = np.random.default_rng(0).normal(size=g.n)

# %%
heat = Kernel.hkpr(3.0)
want = linalg.expm(-3.0 * (np.eye(g.n) - S)) @ x
for method in ("pw", "chebypower", "chebypush"):
    got = general_gp_vector(g, heat, 0.5, x, method)
    print(f"{method:>10}: max error {np.abs(got - want).max():.1e}")

# %%
# several signals at once, e.g. node features
X = np.random.default_rng(1).normal(size=(g.n, 3))
Z = general_gp_matrix(g, Kernel.ppr(0.15), 0.5, X, "chebypower")
print(Z.shape)
