"""Single-file model checkpoints shared by every trainable component.

A checkpoint is a torch archive holding a schema version, a `kind` tag, the
constructor config, the weight state dict, and an optional class vocabulary.
Loads validate version and kind before any weights are touched.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import torch

CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for missing fields, version or kind mismatches."""


def save_checkpoint(path, kind: str, config: dict[str, Any],
                    state_dict: dict[str, torch.Tensor],
                    vocab: list[str] | tuple[str, ...] | None = None,
                    extra: dict[str, Any] | None = None) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": kind,
        "config": dict(config),
        "state": state_dict,
        "vocab": list(vocab) if vocab is not None else None,
        "extra": dict(extra) if extra else {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path, expected_kind: str | None = None) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no checkpoint at {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or "version" not in payload:
        raise CheckpointError(f"{path} is not a recognized checkpoint")
    if payload["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {payload['version']} unsupported "
            f"(expected {CHECKPOINT_VERSION})")
    if expected_kind is not None and payload.get("kind") != expected_kind:
        raise CheckpointError(
            f"checkpoint kind {payload.get('kind')!r} (expected {expected_kind!r})")
    return payload
