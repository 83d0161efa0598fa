"""Parametric 6-axis motion trace generators with exact class labels.

Traces cover the four coarse motion classes consumed by the collaboration
prompt (walking, moving, standing up, sitting down) plus stationary and
activity-flavored variants used by the corpus builder. Accelerometer
channels include gravity on z; all generators are pure in (params, rng).
"""

from __future__ import annotations

import numpy as np

from .render import GRAVITY
from .types import ImuSequence

MOTION_CLASSES = ("walking", "moving", "standing_up", "sitting_down")


def _base(n, rng, noise_std=0.02):
    samples = rng.normal(0.0, noise_std, (6, n))
    samples[2] += GRAVITY
    return samples


def _one_shot_bump(n, sample_rate, rng, center_frac=None, width_s=0.8, amp=3.0):
    """A smooth dip-then-rise vertical transient, returned as an az delta."""
    t = np.arange(n) / sample_rate
    if center_frac is None:
        center_frac = rng.uniform(0.3, 0.7)
    c = center_frac * t[-1]
    w = width_s / 2.355  # FWHM -> sigma
    g = np.exp(-0.5 * ((t - c) / w) ** 2)
    # Derivative-of-Gaussian gives the accelerate/decelerate pair.
    return amp * (-(t - c) / w) * g


def walking_trace(duration, sample_rate=200.0, seed=0, step_hz=2.0, intensity=1.0):
    """Periodic gait: fore-aft sway at the step rate, vertical bob at twice it."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = _base(n, rng)
    phase = rng.uniform(0, 2 * np.pi)
    samples[0] += 1.4 * intensity * np.sin(2 * np.pi * step_hz * t + phase)
    samples[1] += 0.5 * intensity * np.sin(2 * np.pi * step_hz * t + phase + 1.2)
    samples[2] += 0.9 * intensity * np.sin(2 * np.pi * 2 * step_hz * t + phase)
    samples[5] += 0.25 * intensity * np.sin(2 * np.pi * step_hz * t + phase + 0.5)
    return ImuSequence(samples=samples, sample_rate=sample_rate)


def moving_trace(duration, sample_rate=200.0, seed=0, intensity=1.0):
    """Unstructured low-frequency body sway, the residual motion class."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = _base(n, rng)
    for ch, amp in ((0, 0.4), (1, 0.4), (5, 0.3)):
        f = rng.uniform(0.3, 0.8)
        samples[ch] += amp * intensity * np.sin(2 * np.pi * f * t + rng.uniform(0, 6.28))
    return ImuSequence(samples=samples, sample_rate=sample_rate)


def standing_up_trace(duration, sample_rate=200.0, seed=0, intensity=1.0):
    """A single upward transition: forward lean then a vertical rise."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    samples = _base(n, rng)
    bump = _one_shot_bump(n, sample_rate, rng, amp=3.2 * intensity)
    samples[2] += bump          # rise: accelerate up, then decelerate
    samples[0] += 0.8 * np.abs(bump) / max(np.max(np.abs(bump)), 1e-9)
    return ImuSequence(samples=samples, sample_rate=sample_rate)


def sitting_down_trace(duration, sample_rate=200.0, seed=0, intensity=1.0):
    """A single downward transition, the mirror of standing up."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    samples = _base(n, rng)
    bump = _one_shot_bump(n, sample_rate, rng, amp=3.2 * intensity)
    samples[2] -= bump
    samples[0] -= 0.5 * np.abs(bump) / max(np.max(np.abs(bump)), 1e-9)
    return ImuSequence(samples=samples, sample_rate=sample_rate)


def still_trace(duration, sample_rate=200.0, seed=0, noise_std=0.02):
    """Stationary wearer: gravity plus sensor noise only."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    return ImuSequence(samples=_base(n, rng, noise_std), sample_rate=sample_rate)


def rhythmic_trace(duration, sample_rate=200.0, seed=0, freq_hz=4.0,
                   amp=0.3, axes=(0, 1)):
    """Small repetitive hand/arm motion bleeding into the head-worn IMU."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = _base(n, rng)
    phase = rng.uniform(0, 2 * np.pi)
    for ch in axes:
        samples[ch] += amp * np.sin(2 * np.pi * freq_hz * t + phase)
        phase += 0.9
    return ImuSequence(samples=samples, sample_rate=sample_rate)


def _rhythmic(freq_hz, amp, axes):
    def gen(duration, sample_rate=200.0, seed=0):
        return rhythmic_trace(duration, sample_rate=sample_rate, seed=seed,
                              freq_hz=freq_hz, amp=amp, axes=axes)
    return gen


# The four canonical classes first, then flavor traces used to give synthetic
# activities distinguishable inertial signatures.
MOTION_GENERATORS = {
    "walking": walking_trace,
    "moving": moving_trace,
    "standing_up": standing_up_trace,
    "sitting_down": sitting_down_trace,
    "still": still_trace,
    "typing": _rhythmic(4.0, 0.25, (0, 1)),
    "stirring": _rhythmic(1.6, 0.5, (1, 4)),
    "scrubbing": _rhythmic(3.0, 0.6, (0, 3)),
    "chopping": _rhythmic(2.2, 0.8, (2, 3)),
    "nodding": _rhythmic(0.8, 0.35, (4, 5)),
}


def generate_motion(name: str, duration: float, sample_rate: float = 200.0,
                    seed: int = 0) -> ImuSequence:
    """Render one motion trace by name (canonical class or flavor)."""
    if name not in MOTION_GENERATORS:
        raise KeyError(f"unknown motion class {name!r}")
    return MOTION_GENERATORS[name](duration, sample_rate=sample_rate, seed=seed)
