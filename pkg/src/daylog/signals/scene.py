"""Scene geometry: listener trajectory, microphone poses, and the exact TDoA oracle.

All geometry is planar. The listener body frame has x pointing forward and
y pointing left; a pose is (position, heading) with heading measured
counter-clockwise from the world x axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .types import DegenerateSceneError

SPEED_OF_SOUND = 343.0

# Ear positions for a nominal binaural device: left ear on +y, right on -y.
BINAURAL_MICS = ((0.0, 0.09), (0.0, -0.09))


@dataclass
class SourceSpec:
    """A point sound source: position in world meters, mono signal, class tag."""

    position: tuple[float, float]
    signal: np.ndarray
    event_class: str = "unknown"
    gain: float = 1.0

    def __post_init__(self):
        self.signal = np.asarray(self.signal, dtype=np.float64)
        if self.signal.ndim != 1:
            raise ValueError("source signal must be mono (1-D)")
        if self.gain < 0:
            raise ValueError("gain must be >= 0")


@dataclass
class Trajectory:
    """Timestamped listener poses, linearly interpolated between knots."""

    times: np.ndarray
    positions: np.ndarray   # [n, 2]
    headings: np.ndarray    # [n], radians, kept continuous (no wrapping)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.headings = np.asarray(self.headings, dtype=np.float64)
        if self.times.ndim != 1 or len(self.times) < 1:
            raise ValueError("trajectory needs at least one timestamped pose")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        if self.positions.shape != (len(self.times), 2):
            raise ValueError("positions must be [n, 2]")
        if self.headings.shape != (len(self.times),):
            raise ValueError("headings must be [n]")

    @classmethod
    def stationary(cls, position=(0.0, 0.0), heading=0.0, duration=1.0) -> "Trajectory":
        return cls(
            times=np.array([0.0, duration]),
            positions=np.array([position, position], dtype=np.float64),
            headings=np.array([heading, heading], dtype=np.float64),
        )

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def pose_at(self, time) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated (positions [..., 2], headings [...]) at the given time(s).

        Raises ValueError outside the trajectory span.
        """
        t = np.asarray(time, dtype=np.float64)
        t0, t1 = self.span
        eps = 1e-9
        if np.any(t < t0 - eps) or np.any(t > t1 + eps):
            raise ValueError(f"time outside trajectory span [{t0}, {t1}]")
        t = np.clip(t, t0, t1)
        x = np.interp(t, self.times, self.positions[:, 0])
        y = np.interp(t, self.times, self.positions[:, 1])
        h = np.interp(t, self.times, self.headings)
        return np.stack([x, y], axis=-1), h


@dataclass
class Scene:
    """A listener with body-frame microphones moving among fixed point sources."""

    mic_positions: list[tuple[float, float]] = field(
        default_factory=lambda: [tuple(m) for m in BINAURAL_MICS]
    )
    sources: list[SourceSpec] = field(default_factory=list)
    trajectory: Trajectory = None
    speed_of_sound: float = SPEED_OF_SOUND
    snr_db: float | None = None
    noise_floor: float = 0.0

    def __post_init__(self):
        if not self.mic_positions:
            raise ValueError("scene needs at least one microphone")
        if self.speed_of_sound <= 0:
            raise ValueError("speed_of_sound must be positive")
        if self.trajectory is None:
            self.trajectory = Trajectory.stationary()

    @property
    def n_mics(self) -> int:
        return len(self.mic_positions)

    def mic_world_positions(self, time) -> np.ndarray:
        """World-frame microphone positions at time(s): [..., n_mics, 2]."""
        pos, heading = self.trajectory.pose_at(time)
        mics = np.asarray(self.mic_positions, dtype=np.float64)  # [m, 2]
        c, s = np.cos(heading), np.sin(heading)
        # Rotate body -> world, then translate by the listener position.
        bx, by = mics[:, 0], mics[:, 1]
        wx = np.multiply.outer(c, bx) - np.multiply.outer(s, by)
        wy = np.multiply.outer(s, bx) + np.multiply.outer(c, by)
        world = np.stack([wx, wy], axis=-1) + pos[..., None, :]
        return world

    def source_body_position(self, source_index: int, time) -> np.ndarray:
        """Source position in the listener body frame at time(s): [..., 2]."""
        src = np.asarray(self.sources[source_index].position, dtype=np.float64)
        pos, heading = self.trajectory.pose_at(time)
        rel = src - pos
        c, s = np.cos(heading), np.sin(heading)
        # World -> body: rotate by -heading.
        bx = c * rel[..., 0] + s * rel[..., 1]
        by = -s * rel[..., 0] + c * rel[..., 1]
        return np.stack([bx, by], axis=-1)


def tdoa_oracle(scene: Scene, source_index: int, mic_i: int, mic_j: int, time: float) -> float:
    """Exact time difference of arrival t_i - t_j for one source, in seconds.

    Microphone positions are rotated and translated by the listener pose at
    `time` before evaluating the closed form (|s - p_i| - |s - p_j|) / c.
    """
    if not 0 <= source_index < len(scene.sources):
        raise IndexError(f"source index {source_index} out of range")
    n = scene.n_mics
    if not (0 <= mic_i < n and 0 <= mic_j < n):
        raise IndexError("microphone index out of range")
    mics = scene.mic_world_positions(time)  # [n, 2] for scalar time
    src = np.asarray(scene.sources[source_index].position, dtype=np.float64)
    d_i = float(np.linalg.norm(src - mics[mic_i]))
    d_j = float(np.linalg.norm(src - mics[mic_j]))
    return (d_i - d_j) / scene.speed_of_sound
