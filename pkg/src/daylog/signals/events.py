"""Parametric generators for the toy audio event palette.

Each named event class produces a waveform with a distinctive spectral and
temporal signature, so classifiers trained on the synthetic corpus have real
structure to learn and every clip carries its generating class as an exact
label. Generators are pure functions of (duration, sample_rate, rng).
"""

from __future__ import annotations

import numpy as np


def _band_noise(n, sample_rate, rng, lo, hi, std=0.15):
    """Gaussian noise band-limited to [lo, hi] Hz via FFT masking."""
    white = rng.normal(0.0, 1.0, n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spec[(freqs < lo) | (freqs > hi)] = 0.0
    shaped = np.fft.irfft(spec, n=n)
    rms = np.sqrt(np.mean(shaped ** 2))
    return shaped * (std / rms) if rms > 0 else shaped


def _burst_train(n, sample_rate, rng, rate_hz, burst_ms, lo, hi, amp=0.5, jitter=0.3):
    """Band-limited noise bursts repeating at rate_hz with timing jitter.

    Always places at least one burst so that slow event classes (for example
    one page turn every second or so) never render to digital silence inside
    a short clip.
    """
    out = np.zeros(n)
    burst_len = max(8, int(burst_ms * 1e-3 * sample_rate))
    burst_len = min(burst_len, max(8, n - 1))
    envelope = np.hanning(burst_len)
    period = sample_rate / rate_hz
    placed = False
    t = rng.uniform(0, period)
    while t < n:
        start = int(t + rng.normal(0, jitter * period * 0.2))
        if 0 <= start < n - burst_len:
            noise = _band_noise(burst_len, sample_rate, rng, lo, hi, std=1.0)
            out[start:start + burst_len] += amp * envelope * noise
            placed = True
        t += period
    if not placed and n > burst_len:
        start = int(rng.integers(0, n - burst_len))
        noise = _band_noise(burst_len, sample_rate, rng, lo, hi, std=1.0)
        out[start:start + burst_len] += amp * envelope * noise
    return out


def _tones(n, sample_rate, freqs, amps, am_hz=0.0, rng=None):
    t = np.arange(n) / sample_rate
    phases = rng.uniform(0, 2 * np.pi, len(freqs)) if rng is not None else np.zeros(len(freqs))
    sig = sum(a * np.sin(2 * np.pi * f * t + p) for f, a, p in zip(freqs, amps, phases))
    if am_hz > 0:
        sig = sig * (0.55 + 0.45 * np.sin(2 * np.pi * am_hz * t))
    return sig


def _decaying_strikes(n, sample_rate, rng, rate_hz, freq, decay_s, amp=0.5):
    out = np.zeros(n)
    period = sample_rate / rate_hz
    t = rng.uniform(0, period)
    while t < n:
        start = int(t)
        length = min(n - start, int(decay_s * sample_rate))
        if length > 8:
            tt = np.arange(length) / sample_rate
            out[start:start + length] += amp * np.exp(-tt / decay_s) * np.sin(
                2 * np.pi * freq * tt)
        t += period * rng.uniform(0.8, 1.2)
    return out


def _normalize(sig, peak=0.7):
    m = np.max(np.abs(sig))
    return sig * (peak / m) if m > 0 else sig


def _gen_keyboard_clicks(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=9.0, burst_ms=12, lo=3000, hi=7000)


def _gen_typewriter_clack(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=5.0, burst_ms=25, lo=1200, hi=2800, amp=0.7)


def _gen_hand_claps(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=2.6, burst_ms=30, lo=400, hi=9000, amp=0.9)


def _gen_applause(n, sr, rng):
    dense = _burst_train(n, sr, rng, rate_hz=22.0, burst_ms=18, lo=500, hi=8000, amp=0.35)
    return dense + _band_noise(n, sr, rng, 300, 6000, std=0.08)


def _gen_speech_babble(n, sr, rng):
    voiced = _band_noise(n, sr, rng, 250, 3200, std=0.3)
    t = np.arange(n) / sr
    syllables = 0.5 + 0.5 * np.clip(np.sin(2 * np.pi * 4.0 * t + rng.uniform(0, 6.28)), 0, None)
    return voiced * syllables


def _gen_water_running(n, sr, rng):
    return _band_noise(n, sr, rng, 800, 16000, std=0.25)


def _gen_faucet_splash(n, sr, rng):
    base = _band_noise(n, sr, rng, 400, 9000, std=0.2)
    return base + _burst_train(n, sr, rng, rate_hz=6.0, burst_ms=40, lo=1000, hi=5000, amp=0.3)


def _gen_chewing(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=1.6, burst_ms=140, lo=100, hi=900, amp=0.5)


def _gen_tv_jingle(n, sr, rng):
    t = np.arange(n) / sr
    toggle = (np.floor(t * 2.5) % 2).astype(bool)
    a = _tones(n, sr, [820.0, 1640.0], [0.4, 0.15], rng=rng)
    b = _tones(n, sr, [1230.0, 2460.0], [0.4, 0.15], rng=rng)
    jingle = np.where(toggle, a, b)
    return jingle + _band_noise(n, sr, rng, 200, 4000, std=0.05)


def _gen_music_chord(n, sr, rng):
    t = np.arange(n) / sr
    vibrato = 1.0 + 0.004 * np.sin(2 * np.pi * 5.0 * t)
    phases = rng.uniform(0, 2 * np.pi, 3)
    sig = sum(0.28 * np.sin(2 * np.pi * f * vibrato * t + p)
              for f, p in zip((220.0, 277.2, 329.6), phases))
    return sig


def _gen_electric_guitar(n, sr, rng):
    t = np.arange(n) / sr
    base = sum((0.5 / k) * np.sin(2 * np.pi * 196.0 * k * t) for k in range(1, 6))
    return np.tanh(3.0 * base) * 0.4


def _gen_vacuum_hum(n, sr, rng):
    hum = _tones(n, sr, [120.0, 240.0, 360.0], [0.35, 0.2, 0.1], rng=rng)
    return hum + _band_noise(n, sr, rng, 500, 10000, std=0.12)


def _gen_pen_scratch(n, sr, rng):
    t = np.arange(n) / sr
    strokes = 0.5 + 0.5 * np.sin(2 * np.pi * 1.9 * t + rng.uniform(0, 6.28))
    return _band_noise(n, sr, rng, 2000, 9000, std=0.1) * strokes


def _gen_glass_clink(n, sr, rng):
    return _decaying_strikes(n, sr, rng, rate_hz=1.2, freq=2500.0, decay_s=0.12, amp=0.6)


def _gen_footsteps(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=1.9, burst_ms=70, lo=60, hi=500, amp=0.7)


def _gen_door_knock(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=3.4, burst_ms=45, lo=80, hi=700, amp=0.8)


def _gen_kettle_whistle(n, sr, rng):
    t = np.arange(n) / sr
    rise = 1800.0 + 120.0 * t / max(t[-1], 1e-9)
    phase = 2 * np.pi * np.cumsum(rise) / sr
    return 0.4 * np.sin(phase)


def _gen_dish_clatter(n, sr, rng):
    return _decaying_strikes(n, sr, rng, rate_hz=2.8, freq=3400.0, decay_s=0.06, amp=0.5)


def _gen_page_turn(n, sr, rng):
    return _burst_train(n, sr, rng, rate_hz=0.9, burst_ms=220, lo=1500, hi=6000, amp=0.3)


def _gen_silence(n, sr, rng):
    return np.zeros(n)


EVENT_GENERATORS = {
    "keyboard_clicks": _gen_keyboard_clicks,
    "typewriter_clack": _gen_typewriter_clack,
    "hand_claps": _gen_hand_claps,
    "applause": _gen_applause,
    "speech_babble": _gen_speech_babble,
    "water_running": _gen_water_running,
    "faucet_splash": _gen_faucet_splash,
    "chewing": _gen_chewing,
    "tv_jingle": _gen_tv_jingle,
    "music_chord": _gen_music_chord,
    "electric_guitar": _gen_electric_guitar,
    "vacuum_hum": _gen_vacuum_hum,
    "pen_scratch": _gen_pen_scratch,
    "glass_clink": _gen_glass_clink,
    "footsteps": _gen_footsteps,
    "door_knock": _gen_door_knock,
    "kettle_whistle": _gen_kettle_whistle,
    "dish_clatter": _gen_dish_clatter,
    "page_turn": _gen_page_turn,
    "silence": _gen_silence,
}

EVENT_CLASSES = tuple(sorted(EVENT_GENERATORS))


def generate_event(name: str, duration: float, sample_rate: float = 48000.0,
                   seed: int | np.random.Generator = 0, peak: float = 0.7) -> np.ndarray:
    """Render one event class to a mono waveform, peak normalized."""
    if name not in EVENT_GENERATORS:
        raise KeyError(f"unknown event class {name!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    return _normalize(EVENT_GENERATORS[name](n, sample_rate, rng), peak=peak)
