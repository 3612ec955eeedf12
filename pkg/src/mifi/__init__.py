"""Multi-camera feature integration for driver-distraction clips.

Fuse frozen per-camera feature tensors, pool them, and train a linear
classifier head with cross-entropy or the cyclical focal loss.
"""

from .errors import ConfigError, DataError, FormatError, InvalidInputError, MifiError, NumericError, ShapeError
from .fusion import FusedFeature, FusionMode, fuse, fuse_channel_concat, fuse_early, fuse_sum, fuse_temporal_concat
from .head import HeadParams, SgdConfig, head_backward, head_forward, init_head, lr_at, sgd_step
from .losses import (
    CaslConfig,
    CrossEntropy,
    CyclicalFocalLoss,
    AsymmetricLoss,
    FocalLoss,
    asymmetric_loss,
    casl_alpha,
    casl_le,
    casl_lh,
    casl_loss,
    cross_entropy,
    finite_diff_check,
    focal_loss,
    loss_grad_wrt_logits,
    make_loss,
)
from .numerics import global_average_pool, make_rng, rng_normal, softmax

__version__ = "0.1.0"
