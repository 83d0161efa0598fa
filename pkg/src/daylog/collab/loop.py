"""Confidence-gated query loop between the local model and the cloud client.

For each incoming window the local scenario model produces a preliminary
multi-label prediction.  Confident windows keep the local label and never
leave the device.  Low-confidence windows (strictly below the query threshold)
are summarised into a structured prompt and sent to the cloud client; an
accepted response becomes the final label for the window and is appended to
the pseudo-label store for later fine-tuning.  Responses that do not parse to
a known category are kept in an audit list only — they are never stored and
never override the local label.

Windows are processed strictly in order, one request in flight at a time,
which trivially satisfies any cap on concurrent cloud calls.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..temporal.sequence import ScenarioAggregator, aggregate_sequence
from .client import LlmError
from .prompt import build_prompt, parse_llm_response, should_query
from .store import PseudoLabelStore
from .types import (PlacedEvent, PromptContext, PseudoLabelRecord,
                    QUERY_THRESHOLD)


@dataclass(frozen=True)
class WindowObservation:
    """One window's inputs to the query loop.

    ``features`` is the window-feature sequence fed to the local scenario
    model (``[n_windows, input_width]``); ``sound_events``/``motion_class``
    carry the already-detected prompt evidence for the same span.
    """

    window_id: str
    features: np.ndarray
    sound_events: tuple[PlacedEvent, ...] = ()
    motion_class: str | None = None


@dataclass(frozen=True)
class WindowOutcome:
    """Final label and provenance for one processed window."""

    window_id: str
    label: str
    confidence: float
    local_label: str
    queried: bool
    source: str  # "local", "llm", or "local_fallback"


@dataclass
class LoopResult:
    """Aggregate outcome of a query-loop run."""

    outcomes: list[WindowOutcome] = field(default_factory=list)
    records: list[PseudoLabelRecord] = field(default_factory=list)
    rejected: list[tuple[str, str]] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)
    n_queries: int = 0

    @property
    def labels(self) -> list[str]:
        return [o.label for o in self.outcomes]


def run_query_loop(model: ScenarioAggregator,
                   windows: Sequence[WindowObservation],
                   client,
                   category_list: Sequence[str],
                   store: PseudoLabelStore | None = None,
                   threshold: float = QUERY_THRESHOLD,
                   timestamp_fn: Callable[[], float] = time.time) -> LoopResult:
    """Run the confidence-gated loop over a sequence of windows.

    The client is called exactly once per window whose local confidence is
    strictly below ``threshold`` — no more, no less — so
    ``result.n_queries == sum(confidence < threshold)`` holds exactly.  A
    client failure (:class:`LlmError`) counts as a query, is logged in
    ``failures``, and falls back to the local label.
    """
    categories = [str(c) for c in category_list]
    if not categories:
        raise ValueError("category_list must be non-empty")
    result = LoopResult()
    for window in windows:
        prediction = aggregate_sequence(model, window.features)
        local_label = prediction.top1_name()
        confidence = prediction.confidence
        if not should_query(confidence, threshold):
            result.outcomes.append(WindowOutcome(
                window_id=window.window_id, label=local_label,
                confidence=confidence, local_label=local_label,
                queried=False, source="local"))
            continue

        context = PromptContext(
            sound_events=window.sound_events,
            preliminary_scenario=(local_label, confidence),
            category_list=tuple(categories),
            motion_class=window.motion_class)
        prompt = build_prompt(context)
        result.n_queries += 1
        try:
            raw = client.complete(prompt)
        except LlmError as error:
            result.failures.append((window.window_id, str(error)))
            result.outcomes.append(WindowOutcome(
                window_id=window.window_id, label=local_label,
                confidence=confidence, local_label=local_label,
                queried=True, source="local_fallback"))
            continue

        parsed = parse_llm_response(raw, categories)
        if parsed is None:
            # Keep for audit, never store, never override the local label.
            result.rejected.append((window.window_id, raw))
            result.outcomes.append(WindowOutcome(
                window_id=window.window_id, label=local_label,
                confidence=confidence, local_label=local_label,
                queried=True, source="local_fallback"))
            continue

        record = PseudoLabelRecord(
            window_id=window.window_id, prompt=prompt, llm_label=parsed,
            local_label=local_label, local_confidence=confidence,
            timestamp=float(timestamp_fn()))
        if store is not None:
            store.append(record)
        result.records.append(record)
        result.outcomes.append(WindowOutcome(
            window_id=window.window_id, label=parsed, confidence=confidence,
            local_label=local_label, queried=True, source="llm"))
    return result
