"""Training, evaluation, and confusion reporting for the localizers.

The loss is per-frame cross-entropy against the quantized geometric label;
frames whose audio is silent (no wavefront has arrived yet, or gaps between
bursts) are masked out of both the loss and the accuracy.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..signals.labels import N_SPATIAL_CLASSES, class_names, label_quantize
from ..signals.scene import Scene
from ..signals.types import AudioClip
from .model import AudioLocalizer, CompensatedLocalizer, TIME_DOWNSAMPLE


def frame_label_oracle(scene: Scene, n_frames: int, window_duration: float,
                       source_index: int = 0,
                       frame_hop: float = 0.01) -> np.ndarray:
    """Quantized class index at each output-frame center, [n_frames] ints.

    Output frame k covers 5 analysis hops; its center sits at
    (5k + 2.5) * frame_hop seconds into the window.
    """
    centers = (TIME_DOWNSAMPLE * np.arange(n_frames) + 2.5) * frame_hop
    centers = np.minimum(centers, window_duration - 1e-9)
    labels = np.empty(n_frames, dtype=np.int64)
    for k, t in enumerate(centers):
        rel = scene.source_body_position(source_index, float(t))
        labels[k] = label_quantize(rel).index
    return labels


def live_frame_mask(clip: AudioClip, n_frames: int,
                    rel_threshold: float = 1e-3) -> np.ndarray:
    """Boolean mask of output frames carrying audible energy.

    The clip is cut into n_frames equal blocks; a block is live when its RMS
    exceeds `rel_threshold` times the loudest block's RMS. An all-silent clip
    yields an all-False mask.
    """
    block = clip.frames // n_frames
    if block < 1:
        raise ValueError("clip too short for the requested frame count")
    trimmed = clip.samples[:, :block * n_frames]
    blocks = trimmed.reshape(clip.channels, n_frames, block)
    rms = np.sqrt(np.mean(blocks ** 2, axis=(0, 2)))
    peak = rms.max()
    if peak <= 0.0:
        return np.zeros(n_frames, dtype=bool)
    return rms > rel_threshold * peak


def _as_tensor(x, dtype) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x.to(dtype)
    return torch.as_tensor(np.asarray(x)).to(dtype)


def masked_frame_loss(logits: torch.Tensor, labels: torch.Tensor,
                      mask: torch.Tensor, multi_source: bool = False) -> torch.Tensor:
    """Mean per-frame classification loss over live frames.

    Single-source: cross-entropy against the class index. Multi-source: BCE
    against the one-hot expansion of the same index (independent sigmoids).
    """
    if not bool(mask.any()):
        raise ValueError("no live frames to train on")
    flat_logits = logits.reshape(-1, N_SPATIAL_CLASSES)[mask.reshape(-1)]
    flat_labels = labels.reshape(-1)[mask.reshape(-1)]
    if multi_source:
        one_hot = nn.functional.one_hot(flat_labels, N_SPATIAL_CLASSES)
        return nn.functional.binary_cross_entropy_with_logits(
            flat_logits, one_hot.to(flat_logits.dtype))
    return nn.functional.cross_entropy(flat_logits, flat_labels)


def train_localizer(model, features, labels, mask, imu=None, epochs: int = 12,
                    batch_size: int = 32, lr: float = 2e-3,
                    seed: int = 0, freeze_motion_epochs: int = 0) -> list[float]:
    """Seeded single-threaded training loop; returns the per-epoch mean loss.

    `features` is [N, 3, T, 64] (already normalized via prep_features),
    `labels` [N, T/5] ints, `mask` [N, T/5] bools, and `imu` [N, 6, T'] when
    the model carries a motion branch. For a compensated model,
    `freeze_motion_epochs` first trains the audio path alone (motion pathway
    silenced); once it has settled, the residual loss — concentrated on the
    direction ambiguities audio cannot resolve — drives the motion pathway.
    """
    uses_imu = isinstance(model, CompensatedLocalizer)
    if uses_imu and imu is None:
        raise ValueError("this model needs the inertial stream")
    feats_t = _as_tensor(features, torch.float32)
    labels_t = _as_tensor(labels, torch.int64)
    mask_t = _as_tensor(mask, torch.bool)
    imu_t = _as_tensor(imu, torch.float32) if uses_imu else None
    n = feats_t.shape[0]
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    history = []
    model.train()
    for epoch in range(epochs):
        use_motion = epoch >= freeze_motion_epochs
        order = rng.permutation(n)
        total, count = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            batch_mask = mask_t[idx]
            if not bool(batch_mask.any()):
                continue
            opt.zero_grad()
            if uses_imu:
                logits = model(feats_t[idx], imu_t[idx], use_motion=use_motion)
            else:
                logits = model(feats_t[idx])
            loss = masked_frame_loss(logits, labels_t[idx], batch_mask,
                                     multi_source=model.multi_source)
            loss.backward()
            opt.step()
            total += float(loss.detach()) * len(idx)
            count += len(idx)
        history.append(total / max(count, 1))
    model.eval()
    return history


def evaluate_localizer(model, features, labels, mask, imu=None,
                       batch_size: int = 64) -> dict:
    """Masked frame accuracy plus the 8x8 confusion matrix (rows = truth)."""
    uses_imu = isinstance(model, CompensatedLocalizer)
    feats_t = _as_tensor(features, torch.float32)
    labels_np = np.asarray(labels, dtype=np.int64)
    mask_np = np.asarray(mask, dtype=bool)
    imu_t = _as_tensor(imu, torch.float32) if uses_imu else None
    model.eval()
    preds = []
    with torch.no_grad():
        for start in range(0, feats_t.shape[0], batch_size):
            sl = slice(start, start + batch_size)
            logits = model(feats_t[sl], imu_t[sl]) if uses_imu else model(feats_t[sl])
            preds.append(logits.argmax(dim=-1).numpy())
    pred_np = np.concatenate(preds, axis=0)
    live_true = labels_np[mask_np]
    live_pred = pred_np[mask_np]
    if live_true.size == 0:
        raise ValueError("no live frames to evaluate")
    confusion = np.zeros((N_SPATIAL_CLASSES, N_SPATIAL_CLASSES), dtype=np.int64)
    np.add.at(confusion, (live_true, live_pred), 1)
    return {
        "accuracy": float(np.mean(live_true == live_pred)),
        "confusion": confusion,
        "n_frames": int(live_true.size),
    }


def front_back_confusion_rate(confusion: np.ndarray) -> float:
    """Fraction of front/back-truth frames predicted in the mirrored sector."""
    front, back = (0, 1), (4, 5)
    fb_rows = confusion[list(front) + list(back)]
    total = fb_rows.sum()
    if total == 0:
        return 0.0
    crossed = (confusion[np.ix_(front, back)].sum()
               + confusion[np.ix_(back, front)].sum())
    return float(crossed / total)


def left_right_confusion_rate(confusion: np.ndarray) -> float:
    """Fraction of left/right-truth frames predicted in the opposite sector."""
    left, right = (2, 3), (6, 7)
    lr_rows = confusion[list(left) + list(right)]
    total = lr_rows.sum()
    if total == 0:
        return 0.0
    crossed = (confusion[np.ix_(left, right)].sum()
               + confusion[np.ix_(right, left)].sum())
    return float(crossed / total)


def write_confusion_csv(confusion: np.ndarray, path) -> None:
    """Emit the confusion matrix as CSV with named rows (truth) and columns."""
    names = class_names()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["truth\\predicted", *names])
        for i, name in enumerate(names):
            writer.writerow([name, *confusion[i].tolist()])


def read_confusion_csv(path) -> np.ndarray:
    """Parse a confusion CSV written by write_confusion_csv."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = class_names()
    if rows[0][1:] != list(names):
        raise ValueError("confusion CSV column order does not match the classes")
    out = np.zeros((N_SPATIAL_CLASSES, N_SPATIAL_CLASSES), dtype=np.int64)
    for i, row in enumerate(rows[1:]):
        if row[0] != names[i]:
            raise ValueError("confusion CSV row order does not match the classes")
        out[i] = [int(v) for v in row[1:]]
    return out
