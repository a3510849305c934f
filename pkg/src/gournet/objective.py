"""Sparse categorical cross-entropy and classification accuracy.

Loss reduction is the batch mean, matching the conventional learning-rate
scale of the training configuration. Probabilities are clamped at 1e-12
before the log so a confidently wrong prediction cannot poison training
with an infinite loss.
"""

from __future__ import annotations

import numpy as np

from .layers import softmax

PROB_FLOOR = 1e-12


def _check_labels(labels: np.ndarray, k: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"label out of range [0, {k}): {labels}")
    return labels.astype(np.int64)


def sparse_ce_loss(probs: np.ndarray, labels) -> float:
    """Mean over the batch of -log(probs[i, label_i])."""
    probs = np.asarray(probs)
    labels = _check_labels(labels, probs.shape[1])
    picked = probs[np.arange(probs.shape[0]), labels]
    return float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())


def sparse_ce_grad_logits(logits: np.ndarray, labels) -> np.ndarray:
    """Fused softmax + cross-entropy gradient: (softmax(z) - onehot) / N."""
    logits = np.asarray(logits)
    labels = _check_labels(labels, logits.shape[1])
    grad = softmax(logits)
    grad[np.arange(logits.shape[0]), labels] -= 1.0
    grad /= logits.shape[0]
    return grad.astype(logits.dtype, copy=False)


def accuracy(probs: np.ndarray, labels) -> float:
    """Fraction of rows whose argmax (ties to the lowest index) is the label."""
    probs = np.asarray(probs)
    labels = _check_labels(labels, probs.shape[1])
    return float((probs.argmax(axis=1) == labels).mean())
