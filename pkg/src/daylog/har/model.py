"""Token-fusion activity classifier over audio, inertial, and text cues.

Each modality contributes one token: its window embedding plus a learnable
modality embedding. A small self-attention encoder mixes however many tokens
are present (no positional encoding — the tokens form a set, not a
sequence), mean-pools them, and a linear head produces the activity
distribution. When the spatial gate reports a far-field-dominated window,
the audio token is dropped before fusion, so distant interference cannot
perturb the prediction and the audio pathway receives no gradient.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from ..checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from ..signals.types import AudioClip
from ..signals.motions import ImuSequence
from ..spatial.types import GATE_AUDIO_OK, GATE_FAR_FIELD
from ..temporal.encoders import (AudioEncoder, ImuEncoder,
                                 audio_window_features, imu_window_features)
from ..temporal.types import EMBEDDING_WIDTH, Embedding
from .text import ScenarioTextEmbedder
from .types import (MODALITY_ORDER, MODE_FULL_MULTIMODAL, MODE_IMU_ONLY,
                    ActivityPrediction, FusedFeature, ModalityToken)

HAR_WINDOW_SECONDS = 5.0
_DURATION_TOL = 1e-6


class HarClassifier(nn.Module):
    """Audio/IMU/scenario token fusion with a softmax activity head."""

    KIND = "har_classifier"

    def __init__(self, activity_names: Sequence[str],
                 scenario_names: Sequence[str] = (),
                 width: int = EMBEDDING_WIDTH, n_heads: int = 4,
                 feedforward: int = 256):
        super().__init__()
        names = tuple(str(n) for n in activity_names)
        if len(names) == 0:
            raise ValueError("activity vocabulary is empty")
        if len(set(names)) != len(names):
            raise ValueError("duplicate activity names")
        self.activity_names = names
        self.width = int(width)
        self.n_heads = int(n_heads)
        self.feedforward = int(feedforward)
        self.audio_encoder = AudioEncoder(self.width)
        self.imu_encoder = ImuEncoder(self.width)
        self.scenario_embedder = ScenarioTextEmbedder(scenario_names,
                                                      self.width)
        self.modality_embeddings = nn.ParameterDict({
            name: nn.Parameter(torch.randn(self.width) * 0.2)
            for name in MODALITY_ORDER
        })
        layer = nn.TransformerEncoderLayer(
            d_model=self.width, nhead=self.n_heads,
            dim_feedforward=self.feedforward, dropout=0.0,
            activation="gelu", batch_first=True)
        self.fusion = nn.TransformerEncoder(layer, num_layers=2,
                                            enable_nested_tensor=False)
        self.head = nn.Linear(self.width, len(names))

    @property
    def scenario_names(self) -> tuple[str, ...]:
        return self.scenario_embedder.scenario_names

    def token_stack(self, audio: torch.Tensor | None = None,
                    imu: torch.Tensor | None = None,
                    text: torch.Tensor | None = None) -> torch.Tensor:
        """Stack present modality embeddings into [B, n_tokens, width].

        Tokens are always assembled in the canonical modality order, so the
        fused output cannot depend on the order the caller held them in.
        """
        rows = []
        for name, feat in (("audio", audio), ("imu", imu), ("text", text)):
            if feat is None:
                continue
            if feat.shape[-1] != self.width:
                raise ValueError(
                    f"{name} embedding width {feat.shape[-1]} does not "
                    f"match model width {self.width}")
            rows.append(feat + self.modality_embeddings[name])
        if not rows:
            raise ValueError("no tokens to fuse")
        return torch.stack(rows, dim=1)

    def fuse_tokens(self, stack: torch.Tensor) -> torch.Tensor:
        """Self-attention over the token set, mean-pooled to [B, width]."""
        return self.fusion(stack).mean(dim=1)

    def logits(self, fused: torch.Tensor) -> torch.Tensor:
        return self.head(fused)


def interference_policy(gate: str) -> str:
    """Map a near/far gate decision to a fusion mode."""
    if gate == GATE_FAR_FIELD:
        return MODE_IMU_ONLY
    if gate == GATE_AUDIO_OK:
        return MODE_FULL_MULTIMODAL
    raise ValueError(f"unknown gate decision {gate!r}")


def extract_near_field(clip: AudioClip, prediction=None) -> AudioClip:
    """Placeholder for distance-based source extraction.

    Separating near-field audio from far-field interference is out of scope
    for this package; the interface exists so callers can route through it,
    but it returns the input unchanged. Far-field windows are instead
    handled by dropping the audio token (see `interference_policy`).
    """
    return clip


def _modality_embedding_array(model: HarClassifier, name: str) -> np.ndarray:
    return (model.modality_embeddings[name].detach().cpu().numpy()
            .astype(np.float64))


def build_tokens(model: HarClassifier,
                 audio: Embedding | None = None,
                 imu: Embedding | None = None,
                 scenario: Embedding | None = None) -> list[ModalityToken]:
    """Wrap available window embeddings into fusion tokens.

    Any subset of modalities may be present (at least one). Each feature
    must match the model width, and its tagged modality must match the slot
    it is passed in.
    """
    slots = (("audio", audio), ("imu", imu), ("text", scenario))
    tokens: list[ModalityToken] = []
    for name, feature in slots:
        if feature is None:
            continue
        if feature.modality != name:
            raise ValueError(
                f"{name} slot received a {feature.modality!r} embedding")
        if feature.width != model.width:
            raise ValueError(
                f"{name} embedding width {feature.width} does not match "
                f"model width {model.width}")
        tokens.append(ModalityToken(
            feature=feature,
            modality_embedding=_modality_embedding_array(model, name)))
    if not tokens:
        raise ValueError("no embeddings given; nothing to fuse")
    return tokens


def fuse(model: HarClassifier,
         tokens: Sequence[ModalityToken]) -> FusedFeature:
    """Fuse a token set into one window feature.

    The tokens are sorted into the canonical modality order before
    encoding, which makes the result exactly invariant to the order of
    `tokens` — the same bits come out for any permutation.
    """
    tokens = list(tokens)
    if not tokens:
        raise ValueError("cannot fuse an empty token list")
    seen = [t.modality for t in tokens]
    if len(set(seen)) != len(seen):
        raise ValueError(f"duplicate modalities in token list: {seen}")
    for token in tokens:
        if token.width != model.width:
            raise ValueError(
                f"token width {token.width} does not match model width "
                f"{model.width}")
    tokens.sort(key=lambda t: MODALITY_ORDER.index(t.modality))
    values = np.stack([t.value for t in tokens], axis=0)
    stack = torch.as_tensor(values, dtype=torch.float32).unsqueeze(0)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            fused = model.fusion(stack).mean(dim=1)[0]
    finally:
        model.train(was_training)
    return FusedFeature(values=fused.cpu().numpy().astype(np.float64))


def classify_activity(model: HarClassifier,
                      fused: FusedFeature) -> ActivityPrediction:
    """Linear head plus softmax over the activity vocabulary."""
    if fused.width != model.width:
        raise ValueError(
            f"fused width {fused.width} does not match model width "
            f"{model.width}")
    vec = torch.as_tensor(fused.values, dtype=torch.float32).unsqueeze(0)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            probs = torch.softmax(model.head(vec), dim=-1)[0]
    finally:
        model.train(was_training)
    return ActivityPrediction(
        probabilities=probs.cpu().numpy().astype(np.float64),
        class_names=model.activity_names)


def _segment_window(clip: AudioClip, imu: ImuSequence,
                    window_seconds: float) -> list[tuple[AudioClip,
                                                         ImuSequence]]:
    """Cut (or pad) a clip/IMU pair into exact `window_seconds` pieces.

    Shorter inputs are padded up to one full window (zeros for audio, edge
    samples for IMU); longer inputs are chunked with the final partial
    chunk padded. Nothing is ever dropped.
    """
    if abs(clip.duration - imu.duration) > 0.5:
        raise ValueError(
            f"audio ({clip.duration:.2f}s) and IMU ({imu.duration:.2f}s) "
            "cover different spans")
    n_windows = max(1, int(np.ceil(
        (clip.duration - _DURATION_TOL) / window_seconds)))
    n_audio = int(round(window_seconds * clip.sample_rate))
    n_imu = int(round(window_seconds * imu.sample_rate))
    pieces = []
    for k in range(n_windows):
        a = clip.samples[:, k * n_audio:(k + 1) * n_audio]
        if a.shape[1] < n_audio:
            a = np.pad(a, ((0, 0), (0, n_audio - a.shape[1])))
        m = imu.samples[:, k * n_imu:(k + 1) * n_imu]
        if m.shape[1] == 0:
            m = imu.samples[:, -1:]
        if m.shape[1] < n_imu:
            m = np.pad(m, ((0, 0), (0, n_imu - m.shape[1])), mode="edge")
        pieces.append((AudioClip(samples=a, sample_rate=clip.sample_rate),
                       ImuSequence(samples=m, sample_rate=imu.sample_rate)))
    return pieces


def classify_window(model: HarClassifier, clip: AudioClip, imu: ImuSequence,
                    scenarios: str | Sequence[str] | None = None,
                    gate: str = GATE_AUDIO_OK,
                    window_seconds: float = HAR_WINDOW_SECONDS
                    ) -> ActivityPrediction:
    """End-to-end activity prediction for one recorded window.

    Inputs longer than `window_seconds` are windowed and the per-piece
    probabilities averaged; shorter inputs are padded. Under a far-field
    gate the audio pathway is skipped entirely, so the output is exactly
    the same for any audio content.
    """
    mode = interference_policy(gate)
    pieces = _segment_window(clip, imu, window_seconds)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            text = (model.scenario_embedder(scenarios).unsqueeze(0)
                    if scenarios is not None else None)
            probs = []
            for piece_clip, piece_imu in pieces:
                audio = None
                if mode == MODE_FULL_MULTIMODAL:
                    feats = torch.as_tensor(
                        audio_window_features(piece_clip)).unsqueeze(0)
                    audio = model.audio_encoder(feats)
                moto = torch.as_tensor(
                    imu_window_features(piece_imu)).unsqueeze(0)
                imu_embed = model.imu_encoder(moto)
                stack = model.token_stack(audio=audio, imu=imu_embed,
                                          text=text)
                logits = model.logits(model.fuse_tokens(stack))
                probs.append(torch.softmax(logits, dim=-1)[0])
            mean = torch.stack(probs, dim=0).mean(dim=0)
    finally:
        model.train(was_training)
    out = mean.cpu().numpy().astype(np.float64)
    return ActivityPrediction(probabilities=out / out.sum(),
                              class_names=model.activity_names)


def write_activity_vocab(path, names: Sequence[str]) -> None:
    """Write the activity vocabulary, one class per line."""
    names = [str(n) for n in names]
    if not names:
        raise ValueError("refusing to write an empty vocabulary")
    if len(set(names)) != len(names):
        raise ValueError("duplicate activity names")
    for name in names:
        if not name.strip() or "\n" in name:
            raise ValueError(f"invalid activity name {name!r}")
    Path(path).write_text("\n".join(names) + "\n", encoding="utf-8")


def read_activity_vocab(path) -> tuple[str, ...]:
    """Read an activity vocabulary file; line number = class index."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise ValueError(f"empty vocabulary file {path}")
    for i, line in enumerate(lines):
        if not line.strip():
            raise ValueError(f"blank class name on line {i + 1} of {path}")
    if len(set(lines)) != len(lines):
        raise ValueError(f"duplicate class names in {path}")
    return tuple(lines)


def save_har_classifier(path, model: HarClassifier) -> None:
    config = {
        "activity_names": list(model.activity_names),
        "scenario_names": list(model.scenario_names),
        "width": model.width,
        "n_heads": model.n_heads,
        "feedforward": model.feedforward,
    }
    save_checkpoint(path, HarClassifier.KIND, config, model.state_dict(),
                    vocab=model.activity_names)


def load_har_classifier(path) -> HarClassifier:
    payload = load_checkpoint(path, expected_kind=HarClassifier.KIND)
    config = payload["config"]
    model = HarClassifier(
        activity_names=tuple(config["activity_names"]),
        scenario_names=tuple(config["scenario_names"]),
        width=config["width"], n_heads=config["n_heads"],
        feedforward=config["feedforward"])
    vocab = payload.get("vocab")
    if vocab is not None and tuple(vocab) != model.activity_names:
        raise CheckpointError(
            "checkpoint vocabulary does not match its configuration")
    model.load_state_dict(payload["state"])
    model.eval()
    return model
