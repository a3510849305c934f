"""Training, evaluation and prediction drivers.

The loop is plain minibatch bookkeeping around the model: shuffle the
training indices with the per-epoch stream, run forward/backward, apply one
Adam step per parameter, then score the validation split. Early stopping
watches validation loss and the best-epoch weights are restored at the end.

Reported train loss/accuracy are the running averages over the epoch's
batches (measured on the forward pass that feeds each update, so the model
drifts during measurement); validation metrics come from a clean pass with
no shuffling and no augmentation.

Every sample index that gets loaded is recorded in the result, so a run can
be audited afterwards — in particular that nothing from the test split was
touched while fitting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .curves import EpochRecord
from .data import Dataset, SplitManifest, STREAM_AUGMENT, batches, epoch_rng
from .errors import DataError, TrainingError
from .images import load_image
from .layers import softmax
from .model import SequentialModel
from .objective import accuracy, sparse_ce_grad_logits, sparse_ce_loss
from .optimize import AdamConfig, AdamState, EarlyStopping, adam_step
from .preprocess import (AugmentPolicy, NO_AUGMENT, augment, rescale,
                         resize_bilinear)
from .tensor import Rng

logger = logging.getLogger(__name__)

HISTORY_HEADER = "epoch,train_loss,train_accuracy,val_loss,val_accuracy"


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 50
    batch_size: int = 32
    adam: AdamConfig = field(default_factory=AdamConfig)
    patience: int = 3
    seed: int = 0
    augment: AugmentPolicy = NO_AUGMENT
    restore_best: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainingResult:
    history: list[EpochRecord]
    best_epoch: int
    best_val_loss: float
    stopped_early: bool
    restored_best: bool
    accessed_indices: set[int]


def make_loader(ds: Dataset, height: int, width: int, cache: bool = True):
    """``load(index) -> HxWxC float32`` resizing to the model's input size.

    Decoded, resized, rescaled images are memoized per index (augmentation
    happens downstream of the cache, so cached pixels stay pristine).
    """
    cached: dict[int, np.ndarray] | None = {} if cache else None

    def load(index: int) -> np.ndarray:
        if cached is not None and index in cached:
            return cached[index]
        sample = ds.samples[index]
        img = rescale(resize_bilinear(load_image(ds.full_path(sample)),
                                      height, width))
        if cached is not None:
            cached[index] = img
        return img

    return load


def _recording(load_fn, accessed: set[int]):
    def load(index: int):
        accessed.add(index)
        return load_fn(index)
    return load


def evaluate(model: SequentialModel, ds: Dataset, sample_indices, load_fn,
             batch_size: int = 32) -> tuple[float, float]:
    """Mean cross-entropy loss and accuracy over the given samples, in
    deterministic order with no augmentation."""
    total_loss = 0.0
    total_correct = 0.0
    seen = 0
    for batch in batches(ds, sample_indices, batch_size, load_fn):
        probs = model.predict_proba(batch.inputs)
        n = len(batch.labels)
        total_loss += sparse_ce_loss(probs, batch.labels) * n
        total_correct += accuracy(probs, batch.labels) * n
        seen += n
    if seen == 0:
        raise DataError("no samples to evaluate")
    return total_loss / seen, total_correct / seen


def predict(model: SequentialModel, images: np.ndarray) -> np.ndarray:
    """Class probabilities for one HxWxC image or an NxHxWxC batch."""
    arr = np.asarray(images, dtype=np.float32)
    single = arr.ndim == 3
    if single:
        arr = arr[None]
    probs = model.predict_proba(arr)
    return probs[0] if single else probs


def train(model: SequentialModel, ds: Dataset, manifest: SplitManifest,
          config: TrainingConfig, load_fn=None) -> TrainingResult:
    """Fit the model on the manifest's train split, scoring the val split
    after every epoch. Only train and val samples are ever loaded."""
    train_idx = manifest.indices("train")
    val_idx = manifest.indices("val")
    if not train_idx:
        raise DataError("manifest has an empty train split")
    if not val_idx:
        raise DataError("manifest has an empty val split")

    if load_fn is None:
        load_fn = make_loader(ds, model.input_shape[0], model.input_shape[1])
    accessed: set[int] = set()
    load_fn = _recording(load_fn, accessed)

    adam_states = {name: AdamState(p.shape, p.dtype)
                   for name, p in model.parameters()}
    stopper = EarlyStopping(config.patience)
    history: list[EpochRecord] = []
    stopped_early = False

    for epoch in range(1, config.epochs + 1):
        shuffle_rng = epoch_rng(config.seed, epoch)
        if config.augment == NO_AUGMENT:
            epoch_load = load_fn
        else:
            aug_rng = Rng(config.seed).derive(STREAM_AUGMENT, epoch)

            def epoch_load(index, _rng=aug_rng):
                return augment(load_fn(index), config.augment, _rng)

        running_loss = 0.0
        running_correct = 0.0
        seen = 0
        for bi, batch in enumerate(batches(ds, train_idx, config.batch_size,
                                           epoch_load, shuffle_rng), start=1):
            logits = model.forward(batch.inputs)
            probs = softmax(logits)
            loss = sparse_ce_loss(probs, batch.labels)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite training loss at epoch {epoch}, batch {bi}")
            model.backward(sparse_ce_grad_logits(logits, batch.labels))
            grads = dict(model.gradients())
            for name, param in model.parameters():
                adam_step(param, grads[name], adam_states[name],
                          config.adam, name)
            n = len(batch.labels)
            running_loss += loss * n
            running_correct += accuracy(probs, batch.labels) * n
            seen += n

        val_loss, val_acc = evaluate(model, ds, val_idx, load_fn,
                                     config.batch_size)
        record = EpochRecord(epoch, running_loss / seen,
                             running_correct / seen, val_loss, val_acc)
        history.append(record)
        logger.info("epoch %d/%d - loss %.4f - accuracy %.4f - "
                    "val_loss %.4f - val_accuracy %.4f", epoch, config.epochs,
                    record.train_loss, record.train_accuracy,
                    record.val_loss, record.val_accuracy)
        if stopper.update(val_loss, model.snapshot()):
            stopped_early = True
            logger.info("early stop after epoch %d (no val_loss improvement "
                        "in %d epochs)", epoch, config.patience)
            break

    restored = False
    if config.restore_best and stopper.best_weights is not None:
        model.restore(stopper.best_weights)
        restored = True
    return TrainingResult(history, stopper.best_epoch, stopper.best_value,
                          stopped_early, restored, accessed)


def save_history(history: list[EpochRecord], path: str) -> None:
    """CSV with a fixed header and six-decimal values, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(HISTORY_HEADER + "\n")
        for r in history:
            f.write(f"{r.epoch},{r.train_loss:.6f},{r.train_accuracy:.6f},"
                    f"{r.val_loss:.6f},{r.val_accuracy:.6f}\n")


def load_history(path: str) -> list[EpochRecord]:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or lines[0] != HISTORY_HEADER:
        raise DataError(f"{path}: not a training history file")
    out = []
    for ln in lines[1:]:
        fields = ln.split(",")
        if len(fields) != 5:
            raise DataError(f"{path}: malformed history row {ln!r}")
        out.append(EpochRecord(int(fields[0]), float(fields[1]),
                               float(fields[2]), float(fields[3]),
                               float(fields[4])))
    return out
