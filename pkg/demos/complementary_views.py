"""Two cameras, each blind to a different half of the class pairs.

Camera 1 cannot tell 0 from 1, 2 from 3, ...; camera 2 cannot tell 1 from
2, 3 from 4, ..., 15 from 0. Either camera alone is capped at 50%, but the
fused head sees both and separates every class. Voting cannot do that: it
only picks between two already-confused answers.

Run: python3 demos/complementary_views.py [seed]
"""

import sys

from mifi.benchmarks import run_complementary

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
r = run_complementary(seed)
print(f"seed {seed}")
for view, acc in r.single.items():
    print(f"  camera {view} alone : {acc:.3f}  (Bayes bound {r.bayes_bound[view]:.2f})")
print(f"  voting          : {r.voting:.3f}")
for mode, acc in r.fused.items():
    print(f"  fused {mode:9s} : {acc:.3f}")
