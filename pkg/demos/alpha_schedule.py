"""The cyclical weight between the easy and hard loss terms.

alpha starts at 1 (pure easy term, i.e. cross-entropy when gamma = 0),
falls linearly to 0 at e_t / beta, then climbs back to 1 by e_t.

Run: python3 demos/alpha_schedule.py
"""

from mifi import CaslConfig, casl_alpha, casl_le, casl_lh

for beta in (1, 2, 4, 6):
    cfg = CaslConfig(beta=beta, total_epochs=100)
    row = " ".join(f"{casl_alpha(e, cfg):4.2f}" for e in range(0, 101, 10))
    print(f"beta={beta}: {row}")

# Where the two terms disagree: the hard term stops rewarding confidence.
print("\n  p_t   easy   hard(0,4)")
for p in (0.1, 0.3, 0.5, 0.65, 0.8, 0.95):
    print(f"{p:5.2f}  {casl_le(p, 0):5.3f}  {casl_lh(p, 0, 4):5.3f}")
