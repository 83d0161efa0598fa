"""Temperature-scaled audio-IMU contrastive objective.

The loss follows the one-directional form literally: categorical
cross-entropy along axis 0 (for each column, softmax over rows with the
diagonal as target), averaged over columns. The symmetric two-directional
variant is available behind the `mode` flag, and `positive_pair_labels`
generalizes the diagonal target to multi-positive masks (uniform target
distribution over all positives in a column).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch

from .types import Embedding, KeyFrameScore, TemperatureParam

LOSS_MODES = ("paper_axis0", "symmetric")
POSITIVE_MODES = ("self_only", "same_scenario")


def _as_tensor(x) -> tuple[torch.Tensor, bool]:
    if isinstance(x, torch.Tensor):
        return x, True
    return torch.as_tensor(np.asarray(x, dtype=np.float64)), False


def contrastive_logits(audio_batch, imu_batch, tau=0.0):
    """Pairwise similarity logits: (audio . imu^T) * exp(tau), shape [B, B].

    Accepts torch tensors (returned as torch, gradients flow) or array-likes
    (returned as numpy). `tau` may be a float, a TemperatureParam, or a torch
    scalar.
    """
    a, a_torch = _as_tensor(audio_batch)
    b, b_torch = _as_tensor(imu_batch)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("batches must be 2-D [B, D]")
    if a.shape != b.shape:
        raise ValueError(f"batch shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    if isinstance(tau, TemperatureParam):
        scale = torch.as_tensor(tau.scale, dtype=a.dtype)
    elif isinstance(tau, torch.Tensor):
        scale = torch.exp(tau)
    else:
        scale = torch.as_tensor(float(np.exp(tau)), dtype=a.dtype)
    logits = (a @ b.T) * scale
    if a_torch or b_torch:
        return logits
    return logits.numpy()


def contrastive_loss(logits, mode: str = "paper_axis0", positive_mask=None):
    """Cross-entropy over similarity logits with diagonal (or masked) targets.

    paper_axis0: for each column j, softmax over rows and target row j
    (uniform over the column's positives when a mask is given); the loss is
    the mean over columns. symmetric: the average of that and the analogous
    axis-1 term. Returns a torch scalar for torch input, float otherwise.
    """
    if mode not in LOSS_MODES:
        raise ValueError(f"mode must be one of {LOSS_MODES}")
    x, was_torch = _as_tensor(logits)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("logits must be a square [B, B] matrix")
    b = x.shape[0]
    if positive_mask is None:
        mask = torch.eye(b, dtype=x.dtype)
    else:
        mask, _ = _as_tensor(positive_mask)
        mask = mask.to(x.dtype)
        if mask.shape != x.shape:
            raise ValueError("positive mask shape mismatch")
        if torch.any(mask.sum(dim=0) == 0) or torch.any(mask.sum(dim=1) == 0):
            raise ValueError("every row and column needs at least one positive")

    def _axis0(m):
        log_q = torch.log_softmax(m, dim=0)           # softmax over rows, per column
        col_targets = mask / mask.sum(dim=0, keepdim=True)
        return -(col_targets * log_q).sum(dim=0).mean()

    loss = _axis0(x)
    if mode == "symmetric":
        log_q1 = torch.log_softmax(x, dim=1)
        row_targets = mask / mask.sum(dim=1, keepdim=True)
        loss = 0.5 * (loss + (-(row_targets * log_q1).sum(dim=1).mean()))
    if was_torch:
        return loss
    return float(loss)


def positive_pair_labels(batch_meta: Sequence, mode: str = "self_only") -> np.ndarray:
    """Positive-pair mask over a batch: identity, or same-scenario blocks."""
    if mode not in POSITIVE_MODES:
        raise ValueError(f"mode must be one of {POSITIVE_MODES}")
    n = len(batch_meta)
    if n == 0:
        raise ValueError("empty batch")
    if mode == "self_only":
        return np.eye(n)
    ids = []
    for meta in batch_meta:
        sid = meta.get("scenario") if isinstance(meta, dict) else meta
        if sid is None:
            raise ValueError("same_scenario mode requires scenario ids")
        ids.append(sid)
    mask = np.array([[1.0 if a == b else 0.0 for b in ids] for a in ids])
    return mask


def keyframe_similarity(audio_e: Embedding, imu_e: Embedding) -> KeyFrameScore:
    """Cosine similarity of the paired embeddings; symmetric by construction."""
    for e in (audio_e, imu_e):
        if e.norm < 1e-12:
            raise ValueError("zero-vector embedding")
    cos = float(np.dot(audio_e.values, imu_e.values)
                / (audio_e.norm * imu_e.norm))
    return KeyFrameScore(similarity=cos)
