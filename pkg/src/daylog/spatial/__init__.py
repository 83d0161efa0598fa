"""Binaural sound localization with inertial motion compensation."""

from .types import (GATE_AUDIO_OK, GATE_FAR_FIELD, MOTION_HIDDEN_WIDTH,
                    MotionFeatures, SpatialPrediction)
from .model import (AudioLocalizer, CompensatedLocalizer, MotionBranch,
                    localize_audio_only, localize_compensated, motion_branch,
                    prep_features, prep_imu)
from .baseline import MIC_SPACING, classical_doa_baseline
from .gate import FAR_FIELD_THRESHOLD, near_far_gate
from .training import (evaluate_localizer, frame_label_oracle,
                       front_back_confusion_rate, left_right_confusion_rate,
                       live_frame_mask, masked_frame_loss, read_confusion_csv,
                       train_localizer, write_confusion_csv)
from .benchmark import (build_localization_set, make_turnaround_window,
                        run_compensation_benchmark, sample_window_params,
                        scene_from_params)

__all__ = [
    "AudioLocalizer", "CompensatedLocalizer", "MotionBranch", "MotionFeatures",
    "SpatialPrediction", "GATE_AUDIO_OK", "GATE_FAR_FIELD",
    "FAR_FIELD_THRESHOLD", "MIC_SPACING", "MOTION_HIDDEN_WIDTH",
    "build_localization_set", "classical_doa_baseline", "evaluate_localizer",
    "frame_label_oracle", "front_back_confusion_rate",
    "left_right_confusion_rate", "live_frame_mask", "localize_audio_only",
    "localize_compensated", "make_turnaround_window", "masked_frame_loss",
    "motion_branch", "near_far_gate", "prep_features", "prep_imu",
    "read_confusion_csv", "run_compensation_benchmark", "sample_window_params",
    "scene_from_params", "train_localizer", "write_confusion_csv",
]
