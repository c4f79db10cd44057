"""
Command-line benchmark
======================

The ``chebyprop`` command runs single queries (JSON), generates cached
ground truth and sweeps error parameters (CSV). Here it is driven from
Python on a synthetic graph.
"""

# %%
import csv
import json
import os
import tempfile
from pathlib import Path

from chebyprop.cli import main
from chebyprop.graph import write_edge_list
from chebyprop.synthetic import preferential_attachment

work = Path(tempfile.mkdtemp())
os.environ["CHEBYPROP_CACHE_DIR"] = str(work / "truth")
write_edge_list(preferential_attachment(3000, 4, seed=4), work / "toy.txt")

# %%
main(["query", "--graph", str(work / "toy.txt"), "--kernel", "ppr:alpha=0.2",
      "--algo", "chebypush", "--source", "0", "--eps-a", "1e-7", "--out", str(work / "q.json")])
doc = json.loads((work / "q.json").read_text())
print(doc["stats"])
print(doc["top"][:5])

# %%
main(["bench", "--graph", str(work / "toy.txt"), "--kernel", "ppr:alpha=0.2",
      "--sources", "uniform:3", "--grid", "1e-3,1e-5,1e-7,1e-9,0", "--out", str(work / "b.csv")])
rows = list(csv.DictReader(open(work / "b.csv")))
print(f"{'algorithm':>10} {'param':>6} {'deg_norm_inf':>12} {'work':>9}")
for r in rows:
    if r["source"] == rows[0]["source"]:
        print(f"{r['algorithm']:>10} {r['param']:>6} {float(r['deg_norm_inf']):12.2e}"
              f" {int(r['push_work']):9d}")
