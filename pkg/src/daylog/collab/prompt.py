"""Byte-exact prompt assembly, query gating, and response parsing.

`build_prompt` is a pure function: identical contexts produce identical
bytes. The grammar is frozen — a system preamble naming the allowed
categories, one line per sound event (near or far template), an optional
motion line, and the preliminary-scenario line. Downstream golden tests
compare against stored fixtures byte for byte, so any change here is a
breaking change.
"""

from __future__ import annotations

import numpy as np

from .types import PLACEMENT_NEAR, PromptContext, QUERY_THRESHOLD

# The apostrophe in "person's" is U+2019, preserved exactly.
PREAMBLE = (
    "You are an expert in human activity analysis. You will receive audio "
    "and IMU recognition results, including extra information on potential "
    "scenarios. Using this information, reason and refine the person’s "
    "scenario. The scenario must be one of the following categories: "
    "{categories}. Your output must be a single line containing just one "
    "word or phrase."
)

NEAR_TEMPLATE = ("the {event} is happening in the near front of the user, "
                 "which is likely to be related to human activity.")
FAR_TEMPLATE = "the {event} is happening in the {direction}."
MOTION_TEMPLATE = "the detected motion is {motion}."
PRELIMINARY_TEMPLATE = ("the preliminary scenario estimation is "
                        "{label}, {confidence:.2f}.")
# Emitted when near and far events co-occur: distance-based separation is
# out of scope, so the prompt says so instead of silently mixing evidence.
MIXED_DISTANCE_NOTE = ("note: both near-field and far-field sound events "
                       "are present and were not separated.")


def _motion_text(motion_class: str) -> str:
    """Canonical class names use underscores; prompts read with spaces."""
    return motion_class.replace("_", " ")


def build_prompt(ctx: PromptContext) -> str:
    """Assemble the full query prompt for one window.

    Line order: preamble, one line per sound event in context order, the
    mixed-distance note when both placements occur, the motion line when a
    motion class is present, and the preliminary-scenario line.
    """
    lines = [PREAMBLE.format(categories=", ".join(ctx.category_list))]
    placements = set()
    for placed in ctx.sound_events:
        placements.add(placed.placement)
        event_name = placed.event.display_class
        if placed.placement == PLACEMENT_NEAR:
            lines.append(NEAR_TEMPLATE.format(event=event_name))
        else:
            lines.append(FAR_TEMPLATE.format(event=event_name,
                                             direction=placed.direction))
    if len(placements) == 2:
        lines.append(MIXED_DISTANCE_NOTE)
    if ctx.motion_class is not None:
        lines.append(MOTION_TEMPLATE.format(
            motion=_motion_text(ctx.motion_class)))
    label, confidence = ctx.preliminary_scenario
    lines.append(PRELIMINARY_TEMPLATE.format(label=label,
                                             confidence=confidence))
    return "\n".join(lines)


def should_query(local_confidence: float,
                 threshold: float = QUERY_THRESHOLD) -> bool:
    """Query the cloud only when local confidence is strictly below 0.5.

    The boundary stays local: a confidence of exactly `threshold` does not
    query.
    """
    c = float(local_confidence)
    if not np.isfinite(c) or not 0.0 <= c <= 1.0:
        raise ValueError(f"confidence {c} outside [0, 1]")
    return c < threshold


def parse_llm_response(raw: str,
                       category_list: tuple[str, ...] | list[str]
                       ) -> str | None:
    """Reduce a raw completion to exactly one category, or reject it.

    Only the first line counts, compared case-insensitively against the
    category list after trimming whitespace. Returns the canonical label
    (as spelled in `category_list`) or None when nothing matches.
    """
    if not category_list:
        raise ValueError("empty category list")
    first_line = raw.split("\n", 1)[0].strip() if raw else ""
    if not first_line:
        return None
    folded = first_line.casefold()
    for label in category_list:
        if folded == label.casefold():
            return label
    return None
