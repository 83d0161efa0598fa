"""On-disk formats: 16-bit PCM WAV, IMU CSV, and JSON scene descriptions."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .events import generate_event
from .scene import Scene, SourceSpec, Trajectory
from .types import AudioClip, ImuSequence

IMU_CSV_HEADER = "timestamp,ax,ay,az,gx,gy,gz"


def write_wav(clip: AudioClip, path) -> None:
    """Write a clip as 16-bit PCM WAV, one file channel per mic channel."""
    pcm = np.clip(np.round(clip.samples.T * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), int(round(clip.sample_rate)), pcm)


def read_wav(path) -> AudioClip:
    rate, data = wavfile.read(str(path))
    if data.ndim == 1:
        data = data[:, None]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32767.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483647.0
    else:
        samples = data.astype(np.float64)
    return AudioClip(samples=np.clip(samples.T, -1.0, 1.0), sample_rate=float(rate))


def write_imu_csv(imu: ImuSequence, path, start_time: float = 0.0,
                  decimate_to: float | None = None) -> None:
    """Write an IMU sequence as CSV with a timestamp column in seconds.

    `decimate_to` selects the low-rate logging mode: samples are kept at the
    requested rate (e.g. 10 Hz) by striding, without filtering.
    """
    samples = imu.samples
    rate = imu.sample_rate
    if decimate_to is not None:
        stride = max(1, int(round(rate / decimate_to)))
        samples = samples[:, ::stride]
        rate = rate / stride
    times = start_time + np.arange(samples.shape[1]) / rate
    table = np.vstack([times, samples]).T
    np.savetxt(str(path), table, delimiter=",", header=IMU_CSV_HEADER,
               comments="", fmt="%.9g")


def read_imu_csv(path) -> tuple[ImuSequence, float]:
    """Read an IMU CSV; returns (sequence, start_time)."""
    table = np.loadtxt(str(path), delimiter=",", skiprows=1, ndmin=2)
    if table.shape[1] != 7:
        raise ValueError("IMU CSV must have 7 columns: timestamp + 6 axes")
    times = table[:, 0]
    if len(times) > 1:
        dt = np.diff(times)
        rate = 1.0 / float(np.median(dt))
    else:
        rate = 200.0
    return ImuSequence(samples=table[:, 1:].T, sample_rate=rate), float(times[0])


def scene_to_dict(scene: Scene, seed: int, source_refs: list[dict] | None = None) -> dict:
    """Serialize a scene; source signals are referenced by generator or file."""
    if source_refs is None:
        source_refs = [{"generator": s.event_class} for s in scene.sources]
    sources = []
    for spec, ref in zip(scene.sources, source_refs):
        entry = {
            "position": [float(spec.position[0]), float(spec.position[1])],
            "class": spec.event_class,
            "gain": float(spec.gain),
        }
        entry.update(ref)
        sources.append(entry)
    traj = scene.trajectory
    return {
        "mics": [[float(x), float(y)] for x, y in scene.mic_positions],
        "sources": sources,
        "trajectory": [
            {"t": float(t), "x": float(p[0]), "y": float(p[1]), "heading": float(h)}
            for t, p, h in zip(traj.times, traj.positions, traj.headings)
        ],
        "speed_of_sound": float(scene.speed_of_sound),
        "snr_db": None if scene.snr_db is None else float(scene.snr_db),
        "noise_floor": float(scene.noise_floor),
        "seed": int(seed),
    }


def save_scene(scene: Scene, seed: int, path, source_refs=None) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene, seed, source_refs),
                                     indent=2, sort_keys=True) + "\n")


def _resolve_source_signal(entry: dict, duration: float, base_dir: Path) -> np.ndarray:
    if "file" in entry:
        clip = read_wav(base_dir / entry["file"])
        return clip.samples.mean(axis=0)
    name = entry.get("generator", entry.get("class"))
    return generate_event(name, duration, seed=int(entry.get("signal_seed", 0)))


def load_scene(path_or_dict, duration: float | None = None) -> tuple[Scene, int]:
    """Load a scene description; returns (scene, seed).

    Generator-backed sources need `duration` to know how much signal to render;
    file-backed sources take their length from the file.
    """
    if isinstance(path_or_dict, dict):
        data = path_or_dict
        base_dir = Path(".")
    else:
        path = Path(path_or_dict)
        data = json.loads(path.read_text())
        base_dir = path.parent
    traj_rows = data["trajectory"]
    trajectory = Trajectory(
        times=np.array([row["t"] for row in traj_rows]),
        positions=np.array([[row["x"], row["y"]] for row in traj_rows]),
        headings=np.array([row["heading"] for row in traj_rows]),
    )
    if duration is None:
        duration = trajectory.span[1] - trajectory.span[0]
    sources = []
    for entry in data["sources"]:
        signal = _resolve_source_signal(entry, duration, base_dir)
        sources.append(SourceSpec(
            position=tuple(entry["position"]),
            signal=signal,
            event_class=entry.get("class", entry.get("generator", "unknown")),
            gain=float(entry.get("gain", 1.0)),
        ))
    scene = Scene(
        mic_positions=[tuple(m) for m in data["mics"]],
        sources=sources,
        trajectory=trajectory,
        speed_of_sound=float(data.get("speed_of_sound", 343.0)),
        snr_db=data.get("snr_db"),
        noise_floor=float(data.get("noise_floor", 0.0)),
    )
    return scene, int(data.get("seed", 0))
