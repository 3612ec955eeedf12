"""Three ways to merge two cameras' feature tensors, and what pooling keeps.

Run: python3 demos/fusion_operators.py
"""

import numpy as np

from mifi import fuse_channel_concat, fuse_early, fuse_sum, fuse_temporal_concat, global_average_pool

rng = np.random.default_rng(0)
side = rng.normal(size=(4, 2, 3, 3)).astype(np.float32)
dash = rng.normal(size=(4, 2, 3, 3)).astype(np.float32)

print("per-camera tensor", side.shape)
for name, op in [("sum", fuse_sum), ("channel concat", fuse_channel_concat), ("temporal concat", fuse_temporal_concat)]:
    fused = op(side, dash).tensor
    print(f"{name:16s} -> {fused.shape}, pooled length {global_average_pool(fused).shape[0]}")

# Sum and temporal concat both pool to a C-vector; temporal concat's is the
# mean of the two cameras' pooled vectors, sum's is twice that.
t = global_average_pool(fuse_temporal_concat(side, dash).tensor)
s = global_average_pool(fuse_sum(side, dash).tensor)
print("sum pooled == 2 x temporal pooled:", np.allclose(s, 2 * t))

# Channel concat keeps the two cameras apart, so the head sees both.
c = global_average_pool(fuse_channel_concat(side, dash).tensor)
print("channel concat pooled = [side | dash]:", np.allclose(c, np.concatenate([global_average_pool(side), global_average_pool(dash)])))

# Early fusion joins raw frames along time; with a pooled linear head and no
# backbone in between it lands on exactly the temporal-concat vector.
print("early == temporal concat after pooling:", np.array_equal(global_average_pool(fuse_early(side, dash)), t))
