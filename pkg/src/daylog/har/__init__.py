"""Human-activity recognition by set-style fusion of modality tokens."""

from .types import (MODALITY_ORDER, MODE_FULL_MULTIMODAL, MODE_IMU_ONLY,
                    ActivityPrediction, FusedFeature, ModalityToken)
from .text import ScenarioTextEmbedder, scenario_text_embedding
from .model import (HAR_WINDOW_SECONDS, HarClassifier, build_tokens,
                    classify_activity, classify_window, extract_near_field,
                    fuse, interference_policy, load_har_classifier,
                    read_activity_vocab, save_har_classifier,
                    write_activity_vocab)
from .training import (LABEL_SMOOTHING, VARIANTS, evaluate_har,
                       predict_labels, read_per_class_accuracy_csv,
                       train_har, write_per_class_accuracy_csv)
from .benchmark import (ACTIVITY_CLASSES, ACTIVITY_DEFS,
                        SCENARIO_CLASSES, SCENARIO_CONFUSABLE_PAIRS,
                        build_activity_set, render_activity_window,
                        run_activity_ablation, train_activity_model)

__all__ = [
    "MODALITY_ORDER", "MODE_FULL_MULTIMODAL", "MODE_IMU_ONLY",
    "ActivityPrediction", "FusedFeature", "ModalityToken",
    "ScenarioTextEmbedder", "scenario_text_embedding",
    "HAR_WINDOW_SECONDS", "HarClassifier", "build_tokens",
    "classify_activity", "classify_window", "extract_near_field", "fuse",
    "interference_policy", "load_har_classifier", "read_activity_vocab",
    "save_har_classifier", "write_activity_vocab",
    "LABEL_SMOOTHING", "VARIANTS", "evaluate_har", "predict_labels",
    "read_per_class_accuracy_csv", "train_har",
    "write_per_class_accuracy_csv",
    "ACTIVITY_CLASSES", "ACTIVITY_DEFS", "SCENARIO_CLASSES",
    "SCENARIO_CONFUSABLE_PAIRS", "build_activity_set",
    "render_activity_window", "run_activity_ablation",
    "train_activity_model",
]
