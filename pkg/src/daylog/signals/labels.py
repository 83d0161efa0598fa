"""Quantization of relative source positions into the 8 (direction, distance) classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import DegenerateSceneError

DIRECTIONS = ("front", "left", "back", "right")
DISTANCES = ("near", "far")
NEAR_THRESHOLD = 1.5
N_SPATIAL_CLASSES = 8

NEAR_CLASS_INDICES = tuple(2 * d for d in range(4))       # (front..right, near)
FAR_CLASS_INDICES = tuple(2 * d + 1 for d in range(4))    # (front..right, far)


@dataclass(frozen=True)
class SpatialLabel:
    """One of the 8 joint direction x distance classes."""

    direction: str
    distance: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}")

    @property
    def index(self) -> int:
        return 2 * DIRECTIONS.index(self.direction) + DISTANCES.index(self.distance)

    @classmethod
    def from_index(cls, index: int) -> "SpatialLabel":
        if not 0 <= index < N_SPATIAL_CLASSES:
            raise ValueError(f"class index must be in [0, 8), got {index}")
        return cls(DIRECTIONS[index // 2], DISTANCES[index % 2])


def class_names() -> tuple[str, ...]:
    return tuple(f"{DIRECTIONS[i // 2]}_{DISTANCES[i % 2]}"
                 for i in range(N_SPATIAL_CLASSES))


def label_quantize(relative_position, near_threshold: float = NEAR_THRESHOLD) -> SpatialLabel:
    """Quantize a body-frame position (x forward, y left) into a SpatialLabel.

    Azimuth sectors are half-open 90 degree quadrants centered on the axes:
    front = [-45, 45), left = [45, 135), back = [135, 225), right = [225, 315).
    Distance is near iff the range is strictly below `near_threshold`.
    """
    x, y = float(relative_position[0]), float(relative_position[1])
    r = float(np.hypot(x, y))
    if r == 0.0:
        raise DegenerateSceneError("source exactly at the listener origin")
    azimuth = np.degrees(np.arctan2(y, x))  # (-180, 180], 0 = straight ahead
    # Shift so front starts at 0, then cut into half-open 90-degree sectors.
    sector = int(np.floor(((azimuth + 45.0) % 360.0) / 90.0)) % 4
    direction = DIRECTIONS[sector]
    distance = "near" if r < near_threshold else "far"
    return SpatialLabel(direction, distance)
