"""Audio event detection feeding the prompt builder.

Any object with `class_names` and `predict_probabilities(clip)` can serve
as the classifier. The shipped `TemplateEventClassifier` matches a clip's
average log-Mel spectrum against per-class templates rendered from the
synthetic generators — deterministic, training-free, and accurate enough
on the toy vocabulary to exercise the full prompting path.
"""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..signals.events import EVENT_CLASSES, generate_event
from ..signals.features import log_mel
from ..signals.render import render_binaural
from ..signals.scene import Scene, SourceSpec, Trajectory
from ..signals.types import AudioClip
from .types import (EVENT_PROBABILITY_FLOOR, MAX_RETAINED_EVENTS, SoundEvent)


@runtime_checkable
class EventClassifier(Protocol):
    class_names: tuple[str, ...]

    def predict_probabilities(self, clip: AudioClip) -> np.ndarray:
        """Per-class probabilities [len(class_names)], summing to one."""
        ...


def _mean_log_mel(clip: AudioClip) -> np.ndarray:
    """Level-normalized average spectrum: the mel profile minus its mean.

    Rendering moves absolute level around (gain, distance, peak rescale),
    which shifts every log-Mel bin by the same offset; centering removes
    that so matching compares spectral shape only.
    """
    mel = log_mel(clip)              # [C, T, n_mels]
    profile = mel.mean(axis=(0, 1))  # [n_mels]
    return profile - profile.mean()


# "silence" is deliberately not a detectable event: a quiet window should
# yield no events at all rather than a confident "silence" detection.
DETECTABLE_EVENT_CLASSES = tuple(c for c in EVENT_CLASSES if c != "silence")


class TemplateEventClassifier:
    """Nearest log-Mel-template classifier over the synthetic vocabulary."""

    def __init__(self,
                 class_names: Sequence[str] = DETECTABLE_EVENT_CLASSES,
                 n_prototypes: int = 3, prototype_seconds: float = 2.0,
                 sample_rate: float = 48000.0, temperature: float = 1.0):
        self.class_names = tuple(class_names)
        self.temperature = float(temperature)
        templates = []
        for name in self.class_names:
            protos = []
            for k in range(n_prototypes):
                # Render prototypes through the same scene pipeline that
                # produces real windows, so template and query spectra share
                # the acoustic floor and peak normalization.
                signal = generate_event(name, prototype_seconds, sample_rate,
                                        seed=1000 + k)
                scene = Scene(
                    sources=[SourceSpec(position=(0.9, 0.0), signal=signal,
                                        event_class=name, gain=0.8)],
                    trajectory=Trajectory.stationary(
                        heading=0.0, duration=prototype_seconds),
                    noise_floor=0.004)
                clip = render_binaural(scene, prototype_seconds,
                                       seed=2000 + k,
                                       sample_rate=sample_rate)
                protos.append(_mean_log_mel(clip))
            templates.append(np.mean(protos, axis=0))
        self.templates = np.stack(templates)        # [K, n_mels]

    def predict_probabilities(self, clip: AudioClip) -> np.ndarray:
        profile = _mean_log_mel(clip)
        distances = np.linalg.norm(self.templates - profile[None, :], axis=1)
        logits = -distances / self.temperature
        logits -= logits.max()
        probs = np.exp(logits)
        return probs / probs.sum()


def detect_sound_events(clip: AudioClip,
                        classifier: EventClassifier) -> list[SoundEvent]:
    """Probability-filtered, sorted, truncated sound events for one window.

    Keeps classes with probability strictly above the 0.3 floor, sorted by
    probability descending, at most five. An all-quiet window simply
    returns an empty list.
    """
    probs = np.asarray(classifier.predict_probabilities(clip),
                       dtype=np.float64)
    if probs.shape != (len(classifier.class_names),):
        raise ValueError(
            f"classifier returned {probs.shape}, expected "
            f"({len(classifier.class_names)},)")
    order = np.argsort(-probs, kind="stable")
    events = []
    for idx in order:
        if probs[idx] <= EVENT_PROBABILITY_FLOOR:
            break
        events.append(SoundEvent(class_name=classifier.class_names[idx],
                                 probability=float(probs[idx])))
        if len(events) == MAX_RETAINED_EVENTS:
            break
    return events
