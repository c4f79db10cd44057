"""
Loading graphs
==============

Edge lists in, CSR out. Ids are compacted in first-seen order and the
random-walk operator P = A D^-1 is applied without building P.
"""

# %%
import io

import numpy as np

from chebyprop.graph import NodeSet, apply_walk, apply_walk_from_subset, load_edge_list
from chebyprop.graph import read_csr_cache, write_csr_cache

text = """# a small social graph
10 20
20 30
30 10
30 40
40 40
20 10
"""
g = load_edge_list(io.StringIO(text))
print("n, m:", g.n, g.m)
print("labels:", g.labels)      # the self-loop on 40 is dropped, 40 survives via 30-40
print("degrees:", g.degrees)

# %%
# P moves mass along edges and keeps the total
x = np.array([1.0, 0, 0, 0])
for _ in range(3):
    x = apply_walk(g, x)
    print(x, x.sum())

# %%
# the local primitive: push only from a node subset, scaled
acc = np.zeros(g.n)
work = apply_walk_from_subset(g, np.ones(g.n), NodeSet.of(g, [2]), 2.0, acc)
print(acc, "work =", work)

# %%
buf = io.BytesIO()
write_csr_cache(g, buf)
buf.seek(0)
h = read_csr_cache(buf)
print("binary cache round trip:", np.array_equal(h.neighbors, g.neighbors))
