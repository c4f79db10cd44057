"""
Kernels and truncation
======================

Taylor and Chebyshev coefficients of PPR and heat kernels, and how many
terms each series needs for a given tail.
"""

# %%
import numpy as np

from chebyprop.kernels import Kernel, custom_cheby_coeffs, plan_truncation

ppr = Kernel.ppr(0.2)
print("PPR Taylor    :", ppr.taylor_coeffs(4))
print("PPR Chebyshev :", ppr.cheby_coeffs(4))

hk = Kernel.hkpr(5.0)
print("HKPR Chebyshev:", hk.cheby_coeffs(6))
print("sum of 60 HKPR Chebyshev terms:", hk.cheby_coeffs(60).sum())

# %%
# quadrature reproduces the closed forms
c = custom_cheby_coeffs(lambda x: 0.2 / (1 - 0.8 * x), 50)
print("max |quadrature - closed form| =", np.abs(c - ppr.cheby_coeffs(50)).max())

# %%
# Chebyshev tails shrink much faster than Taylor tails when the kernel is
# slow (small alpha, large t)
print(f"{'kernel':>16} {'eps':>7} {'K':>5} {'N':>5}")
for kern in (Kernel.ppr(0.2), Kernel.ppr(0.02), Kernel.hkpr(5.0), Kernel.hkpr(20.0)):
    for eps in (1e-3, 1e-6, 1e-9):
        p = plan_truncation(kern, eps)
        print(f"{kern.descriptor():>16} {eps:7.0e} {p.K:5d} {p.N:5d}")

# %%
# custom kernels come as Taylor coefficients, optionally with the function
cosh_like = Kernel.custom([0.5, 0.0, 0.5])
print(cosh_like.cheby_coeffs(3), plan_truncation(cosh_like, 1e-8))
