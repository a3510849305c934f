"""Adam optimizer and the validation-loss early-stopping policy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, TrainingError


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7

    def __post_init__(self):
        if self.lr <= 0 or not (0 <= self.beta1 < 1) or not (0 <= self.beta2 < 1) \
                or self.epsilon <= 0:
            raise ValueError(f"invalid Adam config {self}")


class AdamState:
    """First/second moment buffers and step counter for one parameter."""

    def __init__(self, shape, dtype=np.float32):
        self.m = np.zeros(shape, dtype=dtype)
        self.v = np.zeros(shape, dtype=dtype)
        self.t = 0


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState,
              cfg: AdamConfig, name: str = "param") -> np.ndarray:
    """One bias-corrected Adam update, applied in place. Returns param.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;  t <- t+1
    p <- p - lr * m_hat / (sqrt(v_hat) + eps)
    """
    if param.shape != grad.shape or param.shape != state.m.shape:
        raise ShapeError(f"{name}: param {param.shape}, grad {grad.shape}, "
                         f"state {state.m.shape} shapes disagree")
    if not np.all(np.isfinite(grad)):
        raise TrainingError(f"non-finite gradient for {name}")
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    state.m *= b1
    state.m += (1 - b1) * grad
    state.v *= b2
    state.v += (1 - b2) * grad * grad
    m_hat = state.m / (1 - b1 ** state.t)
    v_hat = state.v / (1 - b2 ** state.t)
    param -= param.dtype.type(cfg.lr) * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return param


class EarlyStopping:
    """Stop after ``patience`` consecutive epochs without a strictly lower
    monitored loss; keeps a snapshot of the best weights for restoration."""

    def __init__(self, patience: int = 3):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best_value = float("inf")
        self.best_epoch = 0
        self.best_weights = None
        self.epochs_since_improvement = 0
        self._epoch = 0

    def update(self, epoch_val_loss: float, weights=None) -> bool:
        """Record one epoch's monitored loss; True means stop now."""
        if not np.isfinite(epoch_val_loss):
            raise TrainingError(f"non-finite validation loss {epoch_val_loss}")
        self._epoch += 1
        if epoch_val_loss < self.best_value:
            self.best_value = float(epoch_val_loss)
            self.best_epoch = self._epoch
            self.best_weights = weights
            self.epochs_since_improvement = 0
            return False
        self.epochs_since_improvement += 1
        return self.epochs_since_improvement >= self.patience
