"""Near/far interference gate over localization output."""

from __future__ import annotations

from .types import GATE_AUDIO_OK, GATE_FAR_FIELD, SpatialPrediction

FAR_FIELD_THRESHOLD = 0.9


def near_far_gate(pred: SpatialPrediction,
                  threshold: float = FAR_FIELD_THRESHOLD) -> str:
    """Classify the acoustic context as usable or far-field dominated.

    Returns ``far_field_dominant`` iff the far-class confidence strictly
    exceeds the threshold; a confidence exactly at the threshold stays
    ``audio_ok``.
    """
    return GATE_FAR_FIELD if pred.far_confidence > threshold else GATE_AUDIO_OK
