"""Local-model fine-tuning from accepted pseudo-labels, with a rollback gate.

Accepted cloud responses accumulate as :class:`PseudoLabelRecord` rows; once
enough of them exist, the local scenario model is fine-tuned on those labels.
Updates only ship when they do not regress a held-out validation split: the
pre-update weights are snapshotted, the candidate weights are evaluated, and a
drop in validation micro-F1 restores the snapshot bitwise.  Training happens on
a detached copy of the weights, and the live model is updated with a single
``load_state_dict`` swap at the end, so a model serving predictions never sees
a half-trained state.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

from ..metrics import evaluate_multilabel_f1
from ..temporal.sequence import ScenarioAggregator, aggregate_sequence
from .types import PseudoLabelRecord

MIN_FINE_TUNE_RECORDS = 32
DEFAULT_FINE_TUNE_LR = 1e-4


@dataclass(frozen=True)
class FineTuneReport:
    """Outcome of one fine-tuning round."""

    applied: bool
    rolled_back: bool
    n_records: int
    f1_before: float
    f1_after: float
    history: tuple[float, ...] = field(default=())

    @property
    def improved(self) -> bool:
        return self.applied and self.f1_after > self.f1_before


def _one_hot_targets(records: Sequence[PseudoLabelRecord],
                     class_names: tuple[str, ...]) -> np.ndarray:
    index = {name: k for k, name in enumerate(class_names)}
    targets = np.zeros((len(records), len(class_names)), dtype=np.float32)
    for row, record in enumerate(records):
        if record.llm_label not in index:
            raise ValueError(
                f"pseudo-label {record.llm_label!r} is not a model class")
        targets[row, index[record.llm_label]] = 1.0
    return targets


def _predict_matrix(model: ScenarioAggregator,
                    sequences: Sequence[np.ndarray]) -> np.ndarray:
    rows = [aggregate_sequence(model, seq).probabilities for seq in sequences]
    return np.stack(rows, axis=0)


def validation_f1(model: ScenarioAggregator,
                  sequences: Sequence[np.ndarray],
                  truth: np.ndarray,
                  threshold: float = 0.5) -> float:
    """Micro-F1 of the aggregator on a labelled validation split."""
    return evaluate_multilabel_f1(truth, _predict_matrix(model, sequences),
                                  threshold=threshold)


def fine_tune_local(model: ScenarioAggregator,
                    records: Sequence[PseudoLabelRecord],
                    features_by_id: Mapping[str, np.ndarray],
                    validation_sequences: Sequence[np.ndarray],
                    validation_truth: np.ndarray,
                    *,
                    min_records: int = MIN_FINE_TUNE_RECORDS,
                    lr: float = DEFAULT_FINE_TUNE_LR,
                    epochs: int = 8,
                    batch_size: int = 16,
                    head_only: bool = True,
                    seed: int = 0) -> FineTuneReport:
    """Fine-tune the local scenario model on accepted pseudo-labels.

    ``features_by_id`` maps each record's ``window_id`` to the window-feature
    sequence (``[n_windows, input_width]``) that produced the original local
    prediction.  With fewer than ``min_records`` records the model is left
    untouched bitwise.  ``head_only=True`` freezes the sequence encoder and
    adapts only the classification head, which keeps the update cheap and
    conservative.  After training, validation micro-F1 is compared against the
    pre-update score; any regression rolls the model back to the snapshotted
    weights bitwise.
    """
    if len(validation_sequences) == 0:
        raise ValueError("validation split must be non-empty")
    f1_before = validation_f1(model, validation_sequences, validation_truth)
    if len(records) < min_records:
        return FineTuneReport(applied=False, rolled_back=False,
                              n_records=len(records),
                              f1_before=f1_before, f1_after=f1_before)

    sequences: list[np.ndarray] = []
    for record in records:
        if record.window_id not in features_by_id:
            raise KeyError(f"no stored features for window {record.window_id!r}")
        feats = np.asarray(features_by_id[record.window_id], dtype=np.float32)
        if feats.ndim == 1:
            feats = feats[None, :]
        if feats.shape[1] != model.input_width:
            raise ValueError("stored feature width does not match the model")
        sequences.append(feats)
    targets = _one_hot_targets(records, model.class_names)

    snapshot = copy.deepcopy(model.state_dict())

    # Train on a detached copy; the live model is updated in one swap below.
    candidate = copy.deepcopy(model)
    if head_only:
        for name, parameter in candidate.named_parameters():
            parameter.requires_grad_(name.startswith("head."))
    trainable = [p for p in candidate.parameters() if p.requires_grad]
    if not trainable:
        raise ValueError("no trainable parameters selected")

    torch.manual_seed(seed)
    n_records = len(sequences)
    rng = np.random.default_rng(seed)
    max_len = max(len(s) for s in sequences)
    padded = np.zeros((n_records, max_len, model.input_width), dtype=np.float32)
    for k, s in enumerate(sequences):
        padded[k, :len(s)] = s
    data = torch.from_numpy(padded)
    lens = torch.tensor([len(s) for s in sequences])
    tgt = torch.from_numpy(targets)

    opt = torch.optim.Adam(trainable, lr=lr)
    bce = nn.BCEWithLogitsLoss()
    history: list[float] = []
    candidate.train()
    for _ in range(epochs):
        order = rng.permutation(n_records)
        total = 0.0
        for start in range(0, n_records, batch_size):
            idx = order[start:start + batch_size]
            batch = torch.from_numpy(idx)
            opt.zero_grad()
            logits = candidate(data[batch], lens[batch])
            loss = bce(logits, tgt[batch])
            loss.backward()
            opt.step()
            total += float(loss.detach()) * len(idx)
        history.append(total / n_records)
    candidate.eval()

    f1_after = validation_f1(candidate, validation_sequences, validation_truth)
    if f1_after < f1_before:
        model.load_state_dict(snapshot)
        return FineTuneReport(applied=False, rolled_back=True,
                              n_records=n_records,
                              f1_before=f1_before, f1_after=f1_after,
                              history=tuple(history))
    model.load_state_dict(candidate.state_dict())
    return FineTuneReport(applied=True, rolled_back=False,
                          n_records=n_records,
                          f1_before=f1_before, f1_after=f1_after,
                          history=tuple(history))
