"""Trainable text-side embeddings for scenario labels.

Scenario hints arrive as plain text labels. Each known label owns one
trainable row in a lookup table; an out-of-vocabulary label falls back to a
dedicated shared row (with a warning) instead of failing. Several labels at
once are averaged and renormalized, so the text token always has unit norm
regardless of how many hints were active.
"""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np
import torch
from torch import nn

from ..temporal.types import EMBEDDING_WIDTH, Embedding

_NORM_EPS = 1e-12


class ScenarioTextEmbedder(nn.Module):
    """Label-keyed lookup table with a dedicated out-of-vocabulary row."""

    def __init__(self, scenario_names: Sequence[str],
                 width: int = EMBEDDING_WIDTH):
        super().__init__()
        names = tuple(str(n) for n in scenario_names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate scenario labels in vocabulary")
        self.scenario_names = names
        self.width = int(width)
        self._index = {name: i for i, name in enumerate(names)}
        # Last row is the shared out-of-vocabulary embedding.
        self.table = nn.Embedding(len(names) + 1, self.width)
        nn.init.normal_(self.table.weight, std=0.2)

    @property
    def oov_index(self) -> int:
        return len(self.scenario_names)

    def label_indices(self, labels: Sequence[str]) -> torch.Tensor:
        """Map labels to table rows, warning once per unknown label."""
        if isinstance(labels, str):
            labels = [labels]
        if len(labels) == 0:
            raise ValueError("no scenario labels given")
        rows = []
        for label in labels:
            idx = self._index.get(label)
            if idx is None:
                warnings.warn(
                    f"unknown scenario label {label!r}; using the shared "
                    "out-of-vocabulary embedding", RuntimeWarning,
                    stacklevel=3)
                idx = self.oov_index
            rows.append(idx)
        return torch.as_tensor(rows, dtype=torch.long,
                               device=self.table.weight.device)

    def forward(self, labels: Sequence[str]) -> torch.Tensor:
        """Unit-norm [width] vector for one label set (differentiable)."""
        rows = self.table(self.label_indices(labels))
        mean = rows.mean(dim=0)
        norm = torch.linalg.vector_norm(mean)
        if float(norm.detach()) < _NORM_EPS:
            raise ValueError("scenario embedding collapsed to zero norm")
        return mean / norm

    def embed_batch(self, label_sets: Sequence[Sequence[str]]) -> torch.Tensor:
        """Stacked unit-norm vectors [B, width], one row per label set."""
        return torch.stack([self(labels) for labels in label_sets], dim=0)


def scenario_text_embedding(embedder: ScenarioTextEmbedder,
                            labels: str | Sequence[str]) -> Embedding:
    """Deterministic text embedding for one or several scenario labels.

    The same label always yields the same vector. Multiple labels are
    averaged and renormalized to unit length.
    """
    with torch.no_grad():
        vec = embedder(labels).detach().cpu().numpy()
    return Embedding(values=np.asarray(vec, dtype=np.float64),
                     modality="text")
