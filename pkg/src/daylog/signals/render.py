"""Rendering of synthetic scenes into sensor streams.

Binaural audio uses per-sample fractional delay plus 1/r attenuation per
microphone (no HRTF); IMU traces come from differentiating the listener
trajectory. Both are pure functions of (scene, seed).
"""

from __future__ import annotations

import numpy as np

from .scene import Scene
from .types import AudioClip, DegenerateSceneError, ImuSequence

GRAVITY = 9.81
MIN_DISTANCE = 0.1
PEAK_CEILING = 0.99


def render_binaural(scene: Scene, duration: float, seed: int,
                    sample_rate: float = 48000.0) -> AudioClip:
    """Render the scene into one clip, one channel per microphone.

    Each source is delayed by its per-mic arrival time (linear fractional-sample
    interpolation, tracking listener motion) and attenuated by 1/max(dist, 0.1).
    Seeded Gaussian noise is added at scene.snr_db relative to the clean mix,
    plus an absolute scene.noise_floor RMS. Deterministic for a fixed seed.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if not scene.sources and scene.noise_floor <= 0.0:
        raise DegenerateSceneError("no sources and zero noise floor")
    n = int(round(duration * sample_rate))
    times = np.arange(n) / sample_rate
    mic_pos = scene.mic_world_positions(times)  # [n, m, 2]
    n_mics = scene.n_mics
    clean = np.zeros((n_mics, n))
    for src in scene.sources:
        if src.gain == 0.0:
            continue
        sig = src.signal
        src_pos = np.asarray(src.position, dtype=np.float64)
        dist = np.linalg.norm(mic_pos - src_pos[None, None, :], axis=-1)  # [n, m]
        for m in range(n_mics):
            d = dist[:, m]
            # Sample emitted at t - d/c arrives at t; sample the source there.
            emit_idx = (times - d / scene.speed_of_sound) * sample_rate
            delayed = np.interp(emit_idx, np.arange(len(sig)), sig,
                                left=0.0, right=0.0)
            clean[m] += src.gain * delayed / np.maximum(d, MIN_DISTANCE)
    rng = np.random.default_rng(seed)
    rel_std = 0.0
    rms = float(np.sqrt(np.mean(clean ** 2)))
    if scene.snr_db is not None and rms > 0.0:
        rel_std = rms * 10.0 ** (-scene.snr_db / 20.0)
    noise_std = float(np.hypot(rel_std, scene.noise_floor))
    mix = clean
    if noise_std > 0.0:
        mix = clean + rng.normal(0.0, noise_std, size=clean.shape)
    peak = float(np.max(np.abs(mix))) if mix.size else 0.0
    if peak > PEAK_CEILING:
        mix = mix * (PEAK_CEILING / peak)
    return AudioClip(samples=mix, sample_rate=sample_rate)


def synth_imu(scene: Scene, duration: float, seed: int,
              sample_rate: float = 200.0, noise_std: float = 0.0) -> ImuSequence:
    """Synthesize the 6-axis IMU stream implied by the listener trajectory.

    Accelerometer channels hold the body-frame second derivative of position
    plus gravity on z; gyroscope z holds the heading rate. Derivatives come
    from central finite differences of the interpolated trajectory.
    """
    t0, t1 = scene.trajectory.span
    if t1 - t0 < duration - 1e-9:
        raise ValueError("trajectory shorter than requested duration")
    n = int(round(duration * sample_rate))
    dt = 1.0 / sample_rate
    times = t0 + np.arange(n) * dt
    pos, heading = scene.trajectory.pose_at(times)
    velocity = np.gradient(pos, dt, axis=0)
    accel_world = np.gradient(velocity, dt, axis=0)
    heading_rate = np.gradient(heading, dt)
    c, s = np.cos(heading), np.sin(heading)
    ax = c * accel_world[:, 0] + s * accel_world[:, 1]
    ay = -s * accel_world[:, 0] + c * accel_world[:, 1]
    az = np.full(n, GRAVITY)
    gx = np.zeros(n)
    gy = np.zeros(n)
    gz = heading_rate
    samples = np.stack([ax, ay, az, gx, gy, gz], axis=0)
    if noise_std > 0.0:
        rng = np.random.default_rng(seed)
        samples = samples + rng.normal(0.0, noise_std, size=samples.shape)
    return ImuSequence(samples=samples, sample_rate=sample_rate)
