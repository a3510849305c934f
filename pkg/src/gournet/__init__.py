"""GourNet: a small from-scratch CNN engine for leaf-disease classification.

Everything numeric is plain numpy under an explicit seeding discipline;
no deep-learning framework is involved. The public surface re-exported
here is the supported API; module internals may move.
"""

from .checkpoint import (load_checkpoint, load_model_weights, save_checkpoint,
                         save_model)
from .config import (ModelConfig, ParamReport, SolveConstraints, SolveResult,
                     audit, bundled_config_text, config_to_text, load_config,
                     parse_config, solve_config)
from .curves import EpochRecord, emit_curves, render_curves
from .data import (Dataset, LabeledBatch, Sample, SplitManifest, batches,
                   epoch_rng, load_manifest, save_manifest, scan_dataset,
                   split_counts, stratified_split)
from .errors import (CheckpointError, ConfigError, DataError, DomainError,
                     GourNetError, ShapeError, TrainingError)
from .layers import (Conv2D, Dense, Flatten, LayerSpec, MaxPool2D, ReLU,
                     conv_spec, dense_spec, flatten_spec, layer_param_count,
                     output_shape, param_count, pool_spec, softmax)
from .model import SequentialModel, build_model, validate_specs
from .objective import accuracy, sparse_ce_grad_logits, sparse_ce_loss
from .optimize import AdamConfig, AdamState, EarlyStopping, adam_step
from .preprocess import (AugmentPolicy, NO_AUGMENT, augment, flip_horizontal,
                         flip_vertical, rescale, resize_bilinear, rotate)
from .tensor import Rng, glorot_uniform_init
from .training import (TrainingConfig, TrainingResult, evaluate, load_history,
                       make_loader, predict, save_history, train)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
