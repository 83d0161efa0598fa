"""Synthetic scenes, exact geometric oracles, and deterministic signal features."""

from .types import (AudioClip, DegenerateSceneError, ImuSequence, SensorWindow,
                    SpatialFeatures, WINDOW_DURATIONS)
from .scene import BINAURAL_MICS, Scene, SourceSpec, Trajectory, tdoa_oracle
from .labels import (DIRECTIONS, DISTANCES, FAR_CLASS_INDICES, N_SPATIAL_CLASSES,
                     NEAR_CLASS_INDICES, NEAR_THRESHOLD, SpatialLabel, class_names,
                     label_quantize)
from .features import (frame_count, gcc_features, gcc_phat_delay, log_mel,
                       mel_filterbank, stack_spatial_features)
from .render import render_binaural, synth_imu
from .events import EVENT_CLASSES, EVENT_GENERATORS, generate_event
from .motions import (MOTION_CLASSES, generate_motion, moving_trace, rhythmic_trace,
                      sitting_down_trace, standing_up_trace, still_trace,
                      walking_trace)
from .io import (read_imu_csv, read_wav, load_scene, save_scene, scene_to_dict,
                 write_imu_csv, write_wav)

__all__ = [
    "AudioClip", "ImuSequence", "SensorWindow", "SpatialFeatures", "Scene",
    "SourceSpec", "Trajectory", "SpatialLabel", "DegenerateSceneError",
    "BINAURAL_MICS", "DIRECTIONS", "DISTANCES", "EVENT_CLASSES",
    "EVENT_GENERATORS", "MOTION_CLASSES", "NEAR_CLASS_INDICES",
    "FAR_CLASS_INDICES", "NEAR_THRESHOLD", "N_SPATIAL_CLASSES",
    "WINDOW_DURATIONS", "class_names", "frame_count", "gcc_features",
    "gcc_phat_delay", "generate_event", "generate_motion", "label_quantize",
    "log_mel", "mel_filterbank", "moving_trace", "read_imu_csv", "read_wav",
    "render_binaural", "rhythmic_trace", "save_scene", "scene_to_dict",
    "load_scene", "sitting_down_trace", "stack_spatial_features",
    "standing_up_trace", "still_trace", "synth_imu", "tdoa_oracle",
    "walking_trace", "write_imu_csv", "write_wav",
]
