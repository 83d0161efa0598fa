"""Classical cross-correlation bearing baseline.

Per-frame GCC-PHAT peak lag converted to an azimuth through the far-field
arcsine relation for a two-microphone pair. A two-element array senses only
the interaural axis, so the estimate lives in the left/right half-planes and
carries the usual front-back ambiguity by construction.
"""

from __future__ import annotations

import numpy as np
from scipy.signal.windows import hann

from ..signals.features import (FRAME_SECONDS, HOP_SECONDS, _phat_whiten,
                                frame_signal)
from ..signals.scene import BINAURAL_MICS, SPEED_OF_SOUND
from ..signals.types import AudioClip

MIC_SPACING = float(np.linalg.norm(np.subtract(BINAURAL_MICS[0], BINAURAL_MICS[1])))
SILENCE_PEAK = 1e-12


def classical_doa_baseline(audio: AudioClip, pair: tuple[int, int] = (0, 1),
                           frame_seconds: float = FRAME_SECONDS,
                           hop_seconds: float = HOP_SECONDS) -> np.ndarray:
    """Azimuth estimate in radians per analysis frame, positive toward +y.

    A positive inter-channel lag means channel ``pair[1]`` lags ``pair[0]``,
    i.e. the source leads on the first microphone; with the default pair that
    maps positive lags to the left half-plane. Lag zero maps to azimuth zero
    (straight ahead or behind — indistinguishable). Raises ValueError on a
    silent clip.
    """
    stereo = audio.stereo_pair(pair)
    if stereo.frames < 1 or float(np.max(np.abs(stereo.samples))) < SILENCE_PEAK:
        raise ValueError("silent input: no correlation mass to estimate a bearing")
    sr = stereo.sample_rate
    frame_len = int(round(frame_seconds * sr))
    hop = int(round(hop_seconds * sr))
    n_fft = 1 << int(np.ceil(np.log2(frame_len)))
    window = hann(frame_len, sym=False)
    first = frame_signal(stereo.samples[0], frame_len, hop) * window
    second = frame_signal(stereo.samples[1], frame_len, hop) * window
    cross = np.conj(np.fft.rfft(first, n=n_fft, axis=1)) * np.fft.rfft(
        second, n=n_fft, axis=1)
    cc = np.fft.irfft(_phat_whiten(cross), n=n_fft, axis=1)
    max_lag = int(np.ceil(MIC_SPACING / SPEED_OF_SOUND * sr)) + 1
    sym = np.concatenate([cc[:, -max_lag:], cc[:, :max_lag + 1]], axis=1)
    dead = np.max(np.abs(cross), axis=1) < SILENCE_PEAK
    lags = np.argmax(np.abs(sym), axis=1) - max_lag
    lags[dead] = 0
    sine = np.clip(lags / sr * SPEED_OF_SOUND / MIC_SPACING, -1.0, 1.0)
    return np.arcsin(sine)
