"""Attention-based NSW pattern classifier: model, loss, training, IO."""

from .checkpoint import CheckpointError, load_params, save_params
from .gradcheck import gradient_check
from .loss import focal_loss, focal_loss_vec
from .model import (
    ClassifierConfig,
    EncoderParams,
    TrainingBatch,
    batch_loss,
    batch_loss_and_grads,
    classify,
    embed_window,
    encode,
    forward_batch,
    init_params,
    load_char_vectors,
    masked_softmax,
)
from .train import (
    AdamState,
    TrainingDiverged,
    TrainResult,
    make_training_batch,
    predict_batch,
    train,
)
from .vocab import Vocabulary, build_vocab

__all__ = [
    "AdamState",
    "CheckpointError",
    "ClassifierConfig",
    "EncoderParams",
    "TrainingBatch",
    "TrainingDiverged",
    "TrainResult",
    "Vocabulary",
    "batch_loss",
    "batch_loss_and_grads",
    "build_vocab",
    "classify",
    "embed_window",
    "encode",
    "focal_loss",
    "focal_loss_vec",
    "forward_batch",
    "gradient_check",
    "init_params",
    "load_char_vectors",
    "load_params",
    "make_training_batch",
    "masked_softmax",
    "predict_batch",
    "save_params",
    "train",
]
