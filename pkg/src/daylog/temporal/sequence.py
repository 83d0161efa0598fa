"""Second-stage sequence model: per-window features -> multi-label scenario.

Each element of a sequence is the concatenation (audio_e, imu_e, cosine
similarity) for one 2-second window; the model compiles them over a horizon
(default 30 s = 15 windows) into independent per-class sigmoid probabilities.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..checkpoint import load_checkpoint, save_checkpoint
from .contrastive import keyframe_similarity
from .types import (
    DEFAULT_HORIZON_SECONDS,
    EMBEDDING_WIDTH,
    Embedding,
    ScenarioPrediction,
)

WINDOW_FEATURE_WIDTH = 2 * EMBEDDING_WIDTH + 1
ARCHITECTURES = ("recurrent", "attention")


def window_feature(audio_e: Embedding, imu_e: Embedding) -> np.ndarray:
    """Concatenate both embeddings with their similarity scalar (width 2D+1)."""
    sim = keyframe_similarity(audio_e, imu_e).similarity
    return np.concatenate([audio_e.values, imu_e.values, [sim]]).astype(np.float32)


class ScenarioAggregator(nn.Module):
    """Recurrent (default) or attention sequence head over window features."""

    KIND = "scenario_aggregator"

    def __init__(self, class_names: tuple[str, ...] | list[str],
                 arch: str = "recurrent",
                 input_width: int = WINDOW_FEATURE_WIDTH,
                 hidden: int = 128):
        super().__init__()
        if arch not in ARCHITECTURES:
            raise ValueError(f"arch must be one of {ARCHITECTURES}")
        if not class_names:
            raise ValueError("need at least one scenario class")
        self.class_names = tuple(class_names)
        self.arch = arch
        self.input_width = input_width
        self.hidden = hidden
        if arch == "recurrent":
            self.rnn = nn.GRU(input_width, hidden, batch_first=True)
        else:
            self.in_proj = nn.Linear(input_width, hidden)
            layer = nn.TransformerEncoderLayer(
                d_model=hidden, nhead=4, dim_feedforward=2 * hidden,
                batch_first=True, dropout=0.0)
            self.encoder = nn.TransformerEncoder(layer, num_layers=1,
                                                 enable_nested_tensor=False)
        self.head = nn.Linear(hidden, len(self.class_names))

    def forward(self, sequences: torch.Tensor,
                lengths: torch.Tensor | None = None) -> torch.Tensor:
        """Logits [B, C] from padded sequences [B, N, input_width]."""
        b, n, _ = sequences.shape
        if lengths is None:
            lengths = torch.full((b,), n, dtype=torch.long)
        if torch.any(lengths < 1):
            raise ValueError("empty sequence in batch")
        if self.arch == "recurrent":
            out, _ = self.rnn(sequences)
            idx = (lengths - 1).view(-1, 1, 1).expand(-1, 1, out.shape[2])
            final = out.gather(1, idx).squeeze(1)
        else:
            h = self.in_proj(sequences)
            pos = torch.arange(n).unsqueeze(0)
            pad_mask = pos >= lengths.unsqueeze(1)
            h = self.encoder(h, src_key_padding_mask=pad_mask)
            keep = (~pad_mask).unsqueeze(-1).to(h.dtype)
            final = (h * keep).sum(dim=1) / keep.sum(dim=1)
        return self.head(final)

    @torch.no_grad()
    def predict(self, features: np.ndarray,
                horizon: float = DEFAULT_HORIZON_SECONDS) -> ScenarioPrediction:
        return aggregate_sequence(self, features, horizon)

    def save(self, path) -> None:
        save_checkpoint(path, self.KIND,
                        {"arch": self.arch, "input_width": self.input_width,
                         "hidden": self.hidden},
                        self.state_dict(), vocab=self.class_names)

    @classmethod
    def load(cls, path) -> "ScenarioAggregator":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        model = cls(class_names=payload["vocab"], **payload["config"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


def aggregate_sequence(model: ScenarioAggregator, per_window_features,
                       horizon: float = DEFAULT_HORIZON_SECONDS) -> ScenarioPrediction:
    """Run the sequence model over up to horizon/2 windows of features.

    `per_window_features` is a list of width-(2D+1) vectors or an equivalent
    [N, 2D+1] array; sequences longer than the horizon keep the most recent
    windows, shorter ones are used as-is (the model handles variable length).
    """
    feats = np.asarray(per_window_features, dtype=np.float32)
    if feats.ndim == 1:
        feats = feats[None, :]
    if feats.size == 0 or feats.shape[0] == 0:
        raise ValueError("empty window sequence")
    if feats.shape[1] != model.input_width:
        raise ValueError(
            f"feature width {feats.shape[1]} != model width {model.input_width}")
    max_windows = max(1, int(round(horizon / 2.0)))
    feats = feats[-max_windows:]
    model.eval()
    with torch.no_grad():
        logits = model(torch.from_numpy(feats)[None],
                       torch.tensor([feats.shape[0]]))
        probs = torch.sigmoid(logits)[0].numpy()
    return ScenarioPrediction(probabilities=probs, class_names=model.class_names)
