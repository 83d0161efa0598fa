"""Seed-deterministic, single-threaded training loops for the temporal stage."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .contrastive import contrastive_loss, positive_pair_labels
from .encoders import ContrastiveAligner
from .sequence import ScenarioAggregator


def train_aligner(model: ContrastiveAligner,
                  audio_feats: np.ndarray,
                  imu_feats: np.ndarray,
                  scenario_ids=None,
                  epochs: int = 30,
                  batch_size: int = 32,
                  lr: float = 1e-3,
                  seed: int = 0,
                  mode: str = "paper_axis0",
                  positives: str = "self_only") -> list[float]:
    """Contrastive training over paired windows; returns per-epoch losses.

    audio_feats: [N, 64, Ta] log-Mel maps; imu_feats: [N, 6, Ti]; both rows
    of index k come from the same window. scenario_ids (length N) enable the
    same_scenario positive mode.
    """
    n = audio_feats.shape[0]
    if imu_feats.shape[0] != n:
        raise ValueError("paired modalities must have equal counts")
    if positives == "same_scenario" and scenario_ids is None:
        raise ValueError("same_scenario mode requires scenario ids")
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    audio_t = torch.from_numpy(np.asarray(audio_feats, dtype=np.float32))
    imu_t = torch.from_numpy(np.asarray(imu_feats, dtype=np.float32))
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    history: list[float] = []
    model.train()
    for _ in range(epochs):
        order = rng.permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            if len(idx) < 2:
                continue
            _, _, logits = model(audio_t[idx], imu_t[idx])
            mask = None
            if positives == "same_scenario":
                mask = positive_pair_labels([scenario_ids[i] for i in idx],
                                            mode="same_scenario")
            loss = contrastive_loss(logits, mode=mode, positive_mask=mask)
            opt.zero_grad()
            loss.backward()
            opt.step()
            model.clamp_tau()
            total += float(loss.detach())
            batches += 1
        history.append(total / max(batches, 1))
    model.eval()
    return history


def train_aggregator(model: ScenarioAggregator,
                     sequences: list[np.ndarray],
                     targets: np.ndarray,
                     epochs: int = 40,
                     batch_size: int = 16,
                     lr: float = 2e-3,
                     seed: int = 0) -> list[float]:
    """Multi-label BCE training on variable-length window sequences.

    sequences: list of [n_i, 2D+1] arrays; targets: [N, C] multi-hot floats.
    """
    n = len(sequences)
    targets = np.asarray(targets, dtype=np.float32)
    if targets.shape != (n, len(model.class_names)):
        raise ValueError("target shape mismatch")
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    lengths_all = np.array([len(s) for s in sequences])
    if np.any(lengths_all < 1):
        raise ValueError("empty sequence in training set")
    max_len = int(lengths_all.max())
    padded = np.zeros((n, max_len, model.input_width), dtype=np.float32)
    for k, s in enumerate(sequences):
        padded[k, :len(s)] = s
    data = torch.from_numpy(padded)
    lens = torch.from_numpy(lengths_all)
    tgt = torch.from_numpy(targets)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    bce = nn.BCEWithLogitsLoss()
    history: list[float] = []
    model.train()
    for _ in range(epochs):
        order = rng.permutation(n)
        total, batches = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            logits = model(data[idx], lens[idx])
            loss = bce(logits, tgt[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += float(loss.detach())
            batches += 1
        history.append(total / max(batches, 1))
    model.eval()
    return history
