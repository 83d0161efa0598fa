"""Shared evaluation metrics used by training gates and the eval harness."""

from __future__ import annotations

import numpy as np

DEFAULT_THRESHOLD = 0.5


def evaluate_multilabel_f1(truth: np.ndarray, probabilities: np.ndarray,
                           threshold: float = DEFAULT_THRESHOLD) -> float:
    """Micro-averaged multi-label F1 = 2TP / (2TP + FP + FN).

    `truth` is a binary [N, C] matrix; `probabilities` holds per-class
    scores thresholded at `threshold` (predicted positive iff score >=
    threshold). All classes pool into one count, so frequent classes weigh
    more. An empty evaluation set is an error, not a silent 0.
    """
    truth = np.asarray(truth)
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if truth.size == 0:
        raise ValueError("empty evaluation set")
    if truth.shape != probabilities.shape:
        raise ValueError(
            f"shape mismatch: truth {truth.shape} vs "
            f"probabilities {probabilities.shape}")
    if not np.all(np.isfinite(probabilities)):
        raise ValueError("non-finite probabilities")
    if not np.all((truth == 0) | (truth == 1)):
        raise ValueError("truth matrix must be binary")
    predicted = probabilities >= threshold
    actual = truth.astype(bool)
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    if 2 * tp + fp + fn == 0:
        # No positive labels anywhere and none predicted: vacuously perfect.
        return 1.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def evaluate_accuracy(truth: np.ndarray, predicted: np.ndarray) -> float:
    """Plain top-1 accuracy over integer class labels."""
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    if truth.size == 0:
        raise ValueError("empty evaluation set")
    if truth.shape != predicted.shape:
        raise ValueError(
            f"shape mismatch: truth {truth.shape} vs predicted "
            f"{predicted.shape}")
    return float(np.mean(truth == predicted))
