"""Training and evaluation for the token-fusion activity classifier.

Batches are split by token composition (which modalities are present after
the interference gate), each group is fused separately, and the losses are
recombined. Windows gated as far-field-dominated never touch the audio
encoder, so its weights receive exactly zero gradient from them.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from ..spatial.types import GATE_FAR_FIELD
from .model import HarClassifier, interference_policy
from .types import MODE_FULL_MULTIMODAL

LABEL_SMOOTHING = 0.05

VARIANTS = ("unimodal_audio", "unimodal_imu", "multimodal",
            "multimodal_scenario")


def _composition(variant: str, gate: str) -> tuple[bool, bool, bool]:
    """(use_audio, use_imu, use_text) for one window under one variant."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    audio_ok = interference_policy(gate) == MODE_FULL_MULTIMODAL
    use_audio = variant != "unimodal_imu" and audio_ok
    use_imu = variant != "unimodal_audio"
    use_text = variant == "multimodal_scenario"
    if not (use_audio or use_imu or use_text):
        raise ValueError(
            f"variant {variant!r} under gate {gate!r} leaves no tokens")
    return use_audio, use_imu, use_text


def _group_by_composition(variant: str, gates: list[str],
                          indices: np.ndarray) -> dict:
    groups: dict[tuple[bool, bool, bool], list[int]] = {}
    for i in indices:
        key = _composition(variant, gates[int(i)])
        groups.setdefault(key, []).append(int(i))
    return {key: groups[key] for key in sorted(groups)}


def _group_logits(model: HarClassifier, dataset: dict, idx: list[int],
                  key: tuple[bool, bool, bool]) -> torch.Tensor:
    use_audio, use_imu, use_text = key
    audio = imu = text = None
    if use_audio:
        feats = torch.as_tensor(dataset["audio"][idx])
        audio = model.audio_encoder(feats)
    if use_imu:
        feats = torch.as_tensor(dataset["imu"][idx])
        imu = model.imu_encoder(feats)
    if use_text:
        text = model.scenario_embedder.embed_batch(
            [dataset["scenarios"][i] for i in idx])
    stack = model.token_stack(audio=audio, imu=imu, text=text)
    return model.logits(model.fuse_tokens(stack))


def train_har(model: HarClassifier, dataset: dict,
              variant: str = "multimodal_scenario", epochs: int = 10,
              batch_size: int = 32, lr: float = 1e-3, seed: int = 0,
              label_smoothing: float = LABEL_SMOOTHING) -> list[float]:
    """Train in place; returns the mean loss per epoch."""
    n = len(dataset["labels"])
    if n == 0:
        raise ValueError("empty training set")
    labels = torch.as_tensor(np.asarray(dataset["labels"], dtype=np.int64))
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    model.train()
    history = []
    for _ in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            groups = _group_by_composition(variant, dataset["gates"], batch)
            optimizer.zero_grad()
            loss_sum = None
            for key, idx in groups.items():
                logits = _group_logits(model, dataset, idx, key)
                part = F.cross_entropy(
                    logits, labels[idx], reduction="sum",
                    label_smoothing=label_smoothing)
                loss_sum = part if loss_sum is None else loss_sum + part
            loss = loss_sum / len(batch)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(batch)
        history.append(total / n)
    model.eval()
    return history


def predict_labels(model: HarClassifier, dataset: dict,
                   variant: str = "multimodal_scenario",
                   batch_size: int = 64) -> np.ndarray:
    """Argmax predictions [N] under one token-composition variant."""
    n = len(dataset["labels"])
    out = np.zeros(n, dtype=np.int64)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            all_idx = np.arange(n)
            for start in range(0, n, batch_size):
                batch = all_idx[start:start + batch_size]
                groups = _group_by_composition(variant, dataset["gates"],
                                               batch)
                for key, idx in groups.items():
                    logits = _group_logits(model, dataset, idx, key)
                    out[idx] = logits.argmax(dim=-1).cpu().numpy()
    finally:
        model.train(was_training)
    return out


def evaluate_har(model: HarClassifier, dataset: dict,
                 variant: str = "multimodal_scenario",
                 batch_size: int = 64) -> dict:
    """Accuracy, per-class accuracy, and a confusion matrix (rows = truth)."""
    labels = np.asarray(dataset["labels"], dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty evaluation set")
    predicted = predict_labels(model, dataset, variant, batch_size)
    k = len(model.activity_names)
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (labels, predicted), 1)
    support = confusion.sum(axis=1)
    correct = np.diag(confusion).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(support > 0, correct / np.maximum(support, 1),
                             np.nan)
    return {
        "accuracy": float(correct.sum() / labels.size),
        "per_class": per_class,
        "support": support,
        "confusion": confusion,
        "class_names": model.activity_names,
    }


def write_per_class_accuracy_csv(path, class_names, per_class,
                                 support) -> None:
    """CSV with one row per activity class: name, support, accuracy."""
    class_names = tuple(class_names)
    per_class = np.asarray(per_class, dtype=np.float64)
    support = np.asarray(support, dtype=np.int64)
    if not (len(class_names) == per_class.shape[0] == support.shape[0]):
        raise ValueError("class names, accuracies, and supports disagree")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "support", "accuracy"])
        for name, sup, acc in zip(class_names, support, per_class):
            writer.writerow([name, int(sup),
                             "" if np.isnan(acc) else f"{acc:.6f}"])


def read_per_class_accuracy_csv(path) -> dict:
    """Inverse of `write_per_class_accuracy_csv`."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["class", "support", "accuracy"]:
        raise ValueError(f"{path} is not a per-class accuracy file")
    names, support, acc = [], [], []
    for row in rows[1:]:
        names.append(row[0])
        support.append(int(row[1]))
        acc.append(np.nan if row[2] == "" else float(row[2]))
    return {"class_names": tuple(names),
            "support": np.asarray(support, dtype=np.int64),
            "per_class": np.asarray(acc, dtype=np.float64)}
