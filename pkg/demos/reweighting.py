"""Cross-entropy against the cyclical focal loss on a benchmark with four
hard classes whose prototypes are squeezed toward each other.

The macro-F1 difference is small and changes sign across seeds; see the
notes in README.md.

Run: python3 demos/reweighting.py [n_seeds]
"""

import sys

import numpy as np

from mifi.benchmarks import HARD_CLASSES, run_reweighting

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
print(f"hard classes {HARD_CLASSES}")
print("seed  F1(ce)  F1(casl)  min-recall(ce)  min-recall(casl)")
rows = []
for seed in range(n):
    r = run_reweighting(seed)
    rows.append(r)
    print(f"{seed:4d}  {r.macro_f1['ce']:.3f}   {r.macro_f1['casl']:.3f}     {r.min_recall['ce']:.3f}           {r.min_recall['casl']:.3f}")
for k in ("ce", "casl"):
    print(f"median macro-F1 {k}: {np.median([r.macro_f1[k] for r in rows]):.3f}")
