"""Deterministic audio features: framing, log-Mel spectrograms, GCC-PHAT lags."""

from __future__ import annotations

import numpy as np
from scipy.signal.windows import hann

from .types import AudioClip, SpatialFeatures

FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
N_MELS = 64
N_LAGS = 64
LOG_EPS = 1e-6


def frame_count(n_samples: int, sample_rate: float, hop_seconds: float = HOP_SECONDS) -> int:
    """Number of analysis frames for a clip: ceil(n_samples / hop)."""
    hop = int(round(hop_seconds * sample_rate))
    return int(np.ceil(n_samples / hop))


def frame_signal(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Slice a 1-D signal into center-padded frames of shape [n_frames, frame_len].

    Frame k is centered on sample k * hop; edges are zero padded, so a clip of
    n samples always yields ceil(n / hop) frames.
    """
    n = len(x)
    if n < 1:
        raise ValueError("empty signal")
    n_frames = int(np.ceil(n / hop))
    half = frame_len // 2
    end = (n_frames - 1) * hop + frame_len - half
    padded = np.concatenate([np.zeros(half), x, np.zeros(max(0, end - n))])
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return padded[idx]


def _stft_magnitude(x, sample_rate, frame_seconds, hop_seconds, n_fft=None):
    frame_len = int(round(frame_seconds * sample_rate))
    hop = int(round(hop_seconds * sample_rate))
    if len(x) < 1:
        raise ValueError("clip shorter than one frame")
    if n_fft is None:
        n_fft = 1 << int(np.ceil(np.log2(frame_len)))
    frames = frame_signal(np.asarray(x, dtype=np.float64), frame_len, hop)
    window = hann(frame_len, sym=False)
    return np.abs(np.fft.rfft(frames * window, n=n_fft, axis=1)), n_fft


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(sample_rate: float, n_fft: int, n_mels: int = N_MELS,
                   fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """Triangular mel filterbank [n_mels, n_fft//2 + 1] with unit-peak filters."""
    if fmax is None:
        fmax = sample_rate / 2.0
    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    fft_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    fb = np.zeros((n_mels, len(fft_freqs)))
    for m in range(n_mels):
        lo, center, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        up = (fft_freqs - lo) / max(center - lo, 1e-12)
        down = (hi - fft_freqs) / max(hi - center, 1e-12)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def log_mel(audio: AudioClip, n_mels: int = N_MELS,
            frame_seconds: float = FRAME_SECONDS,
            hop_seconds: float = HOP_SECONDS) -> np.ndarray:
    """Per-channel log-Mel spectrogram of shape [channels, T, n_mels].

    STFT magnitude is pooled through a triangular mel filterbank and passed
    through log(x + 1e-6); defaults give 25 ms frames with a 10 ms hop.
    """
    if audio.frames < 1:
        raise ValueError("clip shorter than one frame")
    outs = []
    for ch in range(audio.channels):
        mag, n_fft = _stft_magnitude(audio.samples[ch], audio.sample_rate,
                                     frame_seconds, hop_seconds)
        fb = mel_filterbank(audio.sample_rate, n_fft, n_mels)
        outs.append(np.log(mag @ fb.T + LOG_EPS))
    return np.stack(outs, axis=0)


def _phat_whiten(cross: np.ndarray, rel_floor: float = 1e-3) -> np.ndarray:
    """Phase-transform weighting with a relative magnitude floor.

    Bins whose cross-power magnitude sits far below the strongest bin carry no
    usable phase (spectral leakage, interpolation residue); flooring the
    denominator *relative* to the per-spectrum peak keeps them from being
    promoted to full weight the way a tiny absolute epsilon would.
    """
    mag = np.abs(cross)
    peak = mag.max(axis=-1, keepdims=True)
    return cross / np.maximum(mag, rel_floor * peak + 1e-300)


def gcc_features(audio: AudioClip, n_lags: int = N_LAGS,
                 max_lag: int = N_LAGS // 2,
                 frame_seconds: float = FRAME_SECONDS,
                 hop_seconds: float = HOP_SECONDS,
                 pair: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Per-frame PHAT-weighted cross-correlation over symmetric lags, [T, n_lags].

    Lag bins span [-max_lag, max_lag) samples; bin n_lags // 2 is lag zero and a
    positive peak offset of d means channel `pair[1]` lags channel `pair[0]` by
    d samples. Each frame is peak normalized to [-1, 1]; frames with no
    correlation mass (digital silence) fall back to a unit peak at lag zero.
    """
    if audio.channels < 2:
        raise ValueError("cross-correlation needs two channels")
    stereo = audio.stereo_pair(pair)
    frame_len = int(round(frame_seconds * audio.sample_rate))
    hop = int(round(hop_seconds * audio.sample_rate))
    n_fft = 1 << int(np.ceil(np.log2(frame_len)))
    window = hann(frame_len, sym=False)
    left = frame_signal(stereo.samples[0], frame_len, hop) * window
    right = frame_signal(stereo.samples[1], frame_len, hop) * window
    spec_l = np.fft.rfft(left, n=n_fft, axis=1)
    spec_r = np.fft.rfft(right, n=n_fft, axis=1)
    cross = np.conj(spec_l) * spec_r
    cc = np.fft.irfft(_phat_whiten(cross), n=n_fft, axis=1)
    # Reorder circular lags so index 0 is the most negative lag.
    sym = np.concatenate([cc[:, -max_lag:], cc[:, :max_lag]], axis=1)
    lag_grid = np.linspace(-max_lag, max_lag, n_lags, endpoint=False)
    native = np.arange(-max_lag, max_lag)
    if n_lags != 2 * max_lag:
        sym = np.stack([np.interp(lag_grid, native, row) for row in sym])
    peaks = np.max(np.abs(sym), axis=1)
    out = np.zeros_like(sym)
    live = peaks > 1e-10
    out[live] = sym[live] / peaks[live, None]
    out[~live, n_lags // 2] = 1.0
    return out


def gcc_phat_delay(audio: AudioClip, max_lag: int | None = None,
                   pair: tuple[int, int] = (0, 1)) -> int:
    """Whole-clip GCC-PHAT peak lag in samples (positive: second channel lags)."""
    stereo = audio.stereo_pair(pair)
    n = stereo.frames
    n_fft = 1 << int(np.ceil(np.log2(2 * n)))
    spec_l = np.fft.rfft(stereo.samples[0], n=n_fft)
    spec_r = np.fft.rfft(stereo.samples[1], n=n_fft)
    cross = np.conj(spec_l) * spec_r
    if not np.any(np.abs(cross) > 1e-30):
        return 0
    cc = np.fft.irfft(_phat_whiten(cross), n=n_fft)
    if max_lag is None:
        max_lag = n // 2
    max_lag = min(max_lag, n_fft // 2 - 1)
    sym = np.concatenate([cc[-max_lag:], cc[:max_lag + 1]])
    return int(np.argmax(np.abs(sym))) - max_lag


def stack_spatial_features(audio: AudioClip,
                           pair: tuple[int, int] = (0, 1)) -> SpatialFeatures:
    """Stack left/right log-Mel and GCC lags into the [3, T, 64] input tensor."""
    stereo = audio.stereo_pair(pair)
    mels = log_mel(stereo)
    gcc = gcc_features(stereo)
    if mels.shape[1] != gcc.shape[0]:
        raise RuntimeError("log-Mel and GCC frame counts disagree")
    tensor = np.stack([mels[0], mels[1], gcc], axis=0)
    return SpatialFeatures(tensor=tensor, frame_hop=HOP_SECONDS)
