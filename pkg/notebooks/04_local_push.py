"""
Local push
==========

Push variants only touch nodes whose residual is large relative to their
degree. The Chebyshev push negates pushed residuals instead of zeroing
them, which keeps the recurrence exact on the pushed set.
"""

# %%
import numpy as np

from chebyprop.eval import ground_truth, measure
from chebyprop.kernels import Kernel, plan_truncation
from chebyprop.solvers import cheby_push, push
from chebyprop.synthetic import preferential_attachment, star

# %%
# the four-node star, seeded at a leaf, with only c_3 switched on
g = star(3)
tr = cheby_push(g, [0, 0, 0, 1.0], 1, 3, 0.0, thresholds=1 / 3 + 1e-12, by_degree=False,
                trace=True).stats["trace"]
for k in range(3):
    print(f"after iteration {k}: r_cur = {np.round(3 * tr.r_cur[k], 9)}/3, "
          f"pushed {tr.pushed[k].tolist()}")

# %%
g = preferential_attachment(30_000, 4, seed=2)
kern = Kernel.ppr(0.2)
s = 7
truth = ground_truth(g, kern, s).vector
print(f"n={g.n} m={g.m}; one power iteration costs {2 * g.m} edge visits")
for eps_a in (1e-4, 1e-6, 1e-8):
    K = plan_truncation(kern, eps_a / 2).K
    cp = cheby_push(g, kern, s, K, eps_a)
    N = plan_truncation(kern, eps_a / 2).N
    tp = push(g, kern, s, N, eps_a / N)
    print(f"eps_a={eps_a:.0e}"
          f"  chebypush: work={cp.stats['push_work']:9d}"
          f" err={measure(truth, cp.y_hat, g).deg_norm_inf:.1e}"
          f"  push: work={tp.stats['push_work']:9d}"
          f" err={measure(truth, tp.y_hat, g).deg_norm_inf:.1e}")
