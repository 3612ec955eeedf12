from .container import MAGIC, VERSION, decode_tensor, encode_tensor, load_features, save_features
from .dataset import VIEW_IDS, Dataset, Sample, load_dataset, save_dataset
from .keyframes import keyframe_select
from .split import SplitSpec, split_by_driver
from .synth import SynthConfig, ambiguity_groups, generate_synthetic, single_view_bayes_bound
