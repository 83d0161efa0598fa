"""Local/cloud collaboration: prompts, query loop, pseudo-label learning."""
from .client import (LlmError, MockLlmClient, MockRule, RemoteLlmClient,
                     parse_prompt_evidence)
from .events import (DETECTABLE_EVENT_CLASSES, EventClassifier,
                     TemplateEventClassifier, detect_sound_events)
from .finetune import (DEFAULT_FINE_TUNE_LR, MIN_FINE_TUNE_RECORDS,
                       FineTuneReport, fine_tune_local, validation_f1)
from .loop import LoopResult, WindowObservation, WindowOutcome, run_query_loop
from .motion import (FALLBACK_CLASS, FALLBACK_THRESHOLD, MIN_MOTION_SECONDS,
                     MotionNet, classify_motion, train_motion_classifier)
from .ontology import (OntologyMap, default_ontology_path,
                       load_default_ontology, load_ontology, reduce_ontology)
from .prompt import (MIXED_DISTANCE_NOTE, build_prompt, parse_llm_response,
                     should_query)
from .store import GENESIS_HASH, PseudoLabelStore, StoreIntegrityError
from .types import (EVENT_PROBABILITY_FLOOR, FAR_DIRECTIONS,
                    MAX_RETAINED_EVENTS, PLACEMENT_FAR, PLACEMENT_NEAR,
                    PROMPT_MOTION_CLASSES, QUERY_THRESHOLD,
                    MotionClassification, PlacedEvent, PromptContext,
                    PseudoLabelRecord, SoundEvent)

__all__ = [
    "DETECTABLE_EVENT_CLASSES", "DEFAULT_FINE_TUNE_LR",
    "EVENT_PROBABILITY_FLOOR", "EventClassifier", "FALLBACK_CLASS",
    "FALLBACK_THRESHOLD", "FAR_DIRECTIONS", "FineTuneReport", "GENESIS_HASH",
    "LlmError", "LoopResult", "MAX_RETAINED_EVENTS", "MIN_FINE_TUNE_RECORDS",
    "MIN_MOTION_SECONDS", "MIXED_DISTANCE_NOTE", "MockLlmClient", "MockRule",
    "MotionClassification", "MotionNet", "OntologyMap", "PLACEMENT_FAR",
    "PLACEMENT_NEAR", "PROMPT_MOTION_CLASSES", "PlacedEvent", "PromptContext",
    "PseudoLabelRecord", "PseudoLabelStore", "QUERY_THRESHOLD",
    "RemoteLlmClient", "SoundEvent", "StoreIntegrityError",
    "WindowObservation", "WindowOutcome",
    "TemplateEventClassifier", "build_prompt", "classify_motion",
    "default_ontology_path", "detect_sound_events", "fine_tune_local",
    "load_default_ontology", "load_ontology", "parse_llm_response",
    "parse_prompt_evidence", "reduce_ontology", "run_query_loop",
    "should_query", "train_motion_classifier", "validation_f1",
]
