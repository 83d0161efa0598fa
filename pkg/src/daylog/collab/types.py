"""Domain types for LLM-assisted scenario refinement."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EVENT_PROBABILITY_FLOOR = 0.3
MAX_RETAINED_EVENTS = 5
QUERY_THRESHOLD = 0.5

# The coarse motion vocabulary used in prompts; rendered with spaces.
PROMPT_MOTION_CLASSES = ("walking", "moving", "standing_up", "sitting_down")
FAR_DIRECTIONS = ("front", "left", "back", "right")

PLACEMENT_NEAR = "near"
PLACEMENT_FAR = "far"


@dataclass(frozen=True)
class SoundEvent:
    """One detected audio class with its probability.

    `reduced_class` is filled by ontology reduction; until then it equals
    the raw class name.
    """

    class_name: str
    probability: float
    reduced_class: str | None = None

    def __post_init__(self):
        if not self.class_name:
            raise ValueError("empty class name")
        p = float(self.probability)
        if not np.isfinite(p) or not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "probability", p)
        if self.reduced_class is None:
            object.__setattr__(self, "reduced_class", self.class_name)

    @property
    def display_class(self) -> str:
        return self.reduced_class


@dataclass(frozen=True)
class PlacedEvent:
    """A sound event with its spatial tag: near, or far with a direction."""

    event: SoundEvent
    placement: str
    direction: str | None = None

    def __post_init__(self):
        if self.placement not in (PLACEMENT_NEAR, PLACEMENT_FAR):
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.placement == PLACEMENT_FAR:
            if self.direction not in FAR_DIRECTIONS:
                raise ValueError(
                    f"far events need a direction from {FAR_DIRECTIONS}, "
                    f"got {self.direction!r}")
        elif self.direction is not None:
            raise ValueError("near events carry no direction")


@dataclass(frozen=True)
class MotionClassification:
    """Output of the coarse 4-class motion classifier."""

    label: str
    confidence: float
    is_fallback: bool = False

    def __post_init__(self):
        if self.label not in PROMPT_MOTION_CLASSES:
            raise ValueError(f"unknown motion class {self.label!r}")
        c = float(self.confidence)
        if not np.isfinite(c) or not 0.0 <= c <= 1.0:
            raise ValueError(f"confidence {c} outside [0, 1]")
        object.__setattr__(self, "confidence", c)


@dataclass(frozen=True)
class PromptContext:
    """Everything a query prompt is assembled from."""

    sound_events: tuple[PlacedEvent, ...]
    preliminary_scenario: tuple[str, float]
    category_list: tuple[str, ...]
    motion_class: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sound_events", tuple(self.sound_events))
        object.__setattr__(self, "category_list", tuple(self.category_list))
        if not self.category_list:
            raise ValueError("empty category list")
        label, confidence = self.preliminary_scenario
        confidence = float(confidence)
        if not np.isfinite(confidence) or not 0.0 <= confidence <= 1.0:
            raise ValueError("preliminary confidence outside [0, 1]")
        object.__setattr__(self, "preliminary_scenario",
                           (str(label), confidence))
        if self.motion_class is not None \
                and self.motion_class not in PROMPT_MOTION_CLASSES:
            raise ValueError(f"unknown motion class {self.motion_class!r}")


@dataclass(frozen=True)
class PseudoLabelRecord:
    """One accepted LLM refinement, cached for later fine-tuning."""

    window_id: str
    prompt: str
    llm_label: str
    local_label: str
    local_confidence: float
    timestamp: float

    def __post_init__(self):
        c = float(self.local_confidence)
        if not np.isfinite(c) or not 0.0 <= c <= 1.0:
            raise ValueError("local confidence outside [0, 1]")
        object.__setattr__(self, "local_confidence", c)
        object.__setattr__(self, "timestamp", float(self.timestamp))

    def to_payload(self) -> dict:
        return {
            "window_id": self.window_id,
            "prompt": self.prompt,
            "llm_label": self.llm_label,
            "local_label": self.local_label,
            "local_confidence": self.local_confidence,
            "timestamp": self.timestamp,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True,
                          separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_payload(cls, payload: dict) -> "PseudoLabelRecord":
        return cls(window_id=payload["window_id"], prompt=payload["prompt"],
                   llm_label=payload["llm_label"],
                   local_label=payload["local_label"],
                   local_confidence=payload["local_confidence"],
                   timestamp=payload["timestamp"])
