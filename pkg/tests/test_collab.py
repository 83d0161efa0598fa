"""Tests for the local/cloud collaboration layer.

Covers event detection and ontology reduction, coarse motion labelling, the
byte-exact prompt grammar, the confidence gate, response parsing, the mock
and HTTP clients, the hash-chained pseudo-label store, fine-tuning with the
rollback gate, and the drift benchmark end to end.
"""
import http.server
import json
import os
import threading
from pathlib import Path

import numpy as np
import pytest
import torch

import daylog.collab as C
from daylog.collab.benchmark import (DRIFT_SCENARIOS, ORACLE_RULES,
                                     build_drift_experiment,
                                     run_drift_experiment)
from daylog.collab.loop import run_query_loop
from daylog.signals.events import generate_event
from daylog.signals.motions import generate_motion
from daylog.signals.render import render_binaural
from daylog.signals.scene import Scene, SourceSpec, Trajectory
from daylog.temporal.sequence import aggregate_sequence

DATA_DIR = Path(__file__).parent / "data"

CATEGORIES = ("office_work", "kitchen_cooking", "music_practice", "tv_time",
              "social_gathering", "housekeeping")


def _record(window_id="w0", prompt="p", llm_label="office_work",
            local_label="tv_time", local_confidence=0.4, timestamp=1.0):
    return C.PseudoLabelRecord(window_id=window_id, prompt=prompt,
                               llm_label=llm_label, local_label=local_label,
                               local_confidence=local_confidence,
                               timestamp=timestamp)


# ---------------------------------------------------------------- events ---

class StubClassifier:
    """Fixed-probability classifier for the filtering/sorting logic."""

    def __init__(self, class_names, probs):
        self.class_names = tuple(class_names)
        self._probs = np.asarray(probs, dtype=np.float64)

    def predict_probabilities(self, clip):
        return self._probs


def _tiny_clip():
    """Minimal clip for classifiers that ignore their input."""
    from daylog.signals.types import AudioClip
    return AudioClip(np.zeros((2, 4800)), sample_rate=48000.0)


def _quiet_clip(duration=2.0, sr=48000.0, seed=5):
    scene = Scene(sources=[SourceSpec(position=(0.9, 0.0),
                                      signal=generate_event(
                                          "silence", duration, sr, seed=seed),
                                      event_class="silence", gain=0.8)],
                  trajectory=Trajectory.stationary(heading=0.0,
                                                   duration=duration),
                  noise_floor=0.004)
    return render_binaural(scene, duration, seed=seed + 1, sample_rate=sr)


def _event_clip(name, duration=2.0, sr=48000.0, seed=7, gain=0.75,
                distance=1.0):
    scene = Scene(sources=[SourceSpec(position=(distance, 0.0),
                                      signal=generate_event(
                                          name, duration, sr, seed=seed),
                                      event_class=name, gain=gain)],
                  trajectory=Trajectory.stationary(heading=0.0,
                                                   duration=duration),
                  noise_floor=0.004)
    return render_binaural(scene, duration, seed=seed + 1, sample_rate=sr)


@pytest.fixture(scope="module")
def template_classifier():
    return C.TemplateEventClassifier()


class TestEventDetection:
    def test_silence_excluded_from_vocabulary(self):
        assert "silence" not in C.DETECTABLE_EVENT_CLASSES
        assert len(C.DETECTABLE_EVENT_CLASSES) == 19

    def test_filter_is_strict_and_sorted(self):
        names = ("a", "b", "c", "d")
        stub = StubClassifier(names, (0.30, 0.36, 0.04, 0.30))
        events = C.detect_sound_events(_tiny_clip(), stub)
        # 0.30 is not strictly above the floor; only "b" survives.
        assert [e.class_name for e in events] == ["b"]
        assert events[0].probability == pytest.approx(0.36)

    def test_truncates_to_five(self):
        names = tuple(f"c{i}" for i in range(8))
        probs = (0.9, 0.8, 0.7, 0.6, 0.5, 0.45, 0.4, 0.35)  # all > 0.3
        stub = StubClassifier(names, probs)
        events = C.detect_sound_events(_tiny_clip(), stub)
        assert len(events) == 5
        got = [e.probability for e in events]
        assert got == sorted(got, reverse=True)
        assert [e.class_name for e in events] == ["c0", "c1", "c2", "c3", "c4"]

    def test_true_event_detected(self, template_classifier):
        for name, seed in (("electric_guitar", 31), ("water_running", 32),
                           ("keyboard_clicks", 33)):
            clip = _event_clip(name, seed=seed)
            events = C.detect_sound_events(clip, template_classifier)
            assert events, f"no detections for {name}"
            assert events[0].class_name == name

    def test_quiet_window_has_no_events(self, template_classifier):
        assert C.detect_sound_events(_quiet_clip(), template_classifier) == []

    def test_probabilities_sum_to_one(self, template_classifier):
        probs = template_classifier.predict_probabilities(
            _event_clip("applause", seed=41))
        assert probs.shape == (len(template_classifier.class_names),)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)


# -------------------------------------------------------------- ontology ---

class TestOntology:
    def test_guitar_reduces_to_music(self):
        ontology = C.load_default_ontology()
        event = C.SoundEvent("electric_guitar", 0.7)
        reduced = C.reduce_ontology(event, ontology)
        assert reduced.reduced_class == "music"
        assert reduced.display_class == "music"
        assert reduced.probability == pytest.approx(0.7)

    def test_silence_is_fixed_point(self):
        ontology = C.load_default_ontology()
        reduced = C.reduce_ontology(C.SoundEvent("silence", 0.9), ontology)
        assert reduced.display_class == "silence"

    def test_sibling_classes_share_reduction(self):
        ontology = C.load_default_ontology()
        a = C.reduce_ontology(C.SoundEvent("applause", 0.5), ontology)
        b = C.reduce_ontology(C.SoundEvent("hand_claps", 0.5), ontology)
        assert a.reduced_class == b.reduced_class == "human_activity"

    def test_two_level_entry_reduces_to_parent(self):
        ontology = C.load_default_ontology()
        reduced = C.reduce_ontology(C.SoundEvent("door_knock", 0.5), ontology)
        assert reduced.reduced_class == "impact_sounds"

    def test_unmapped_class_warns_and_passes_through(self):
        ontology = C.load_default_ontology()
        event = C.SoundEvent("laser_zap", 0.6)
        with pytest.warns(RuntimeWarning, match="laser_zap"):
            reduced = C.reduce_ontology(event, ontology)
        # passthrough: the unmapped class stays its own display class
        assert reduced.display_class == "laser_zap"
        assert reduced.reduced_class == "laser_zap"

    def test_every_detectable_class_is_mapped(self):
        ontology = C.load_default_ontology()
        for name in C.DETECTABLE_EVENT_CLASSES:
            assert name in ontology, name

    def test_duplicate_child_rejected(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("a\tb\tc\na\tx\ty\n")
        with pytest.raises(ValueError, match="duplicate"):
            C.load_ontology(bad)


# ---------------------------------------------------------------- motion ---

@pytest.fixture(scope="module")
def motion_model():
    return C.train_motion_classifier(seed=0)


class TestMotion:
    def test_walking_and_standing_up(self, motion_model):
        for name in ("walking", "standing_up"):
            trace = generate_motion(name, 4.0, sample_rate=200.0, seed=77)
            result = C.classify_motion(motion_model, trace)
            assert result.label == name
            assert not result.is_fallback
            assert result.confidence >= 0.5

    def test_out_of_vocabulary_trace_stays_in_vocabulary(self, motion_model):
        # "still" is not a coarse class; the result must still be one.
        trace = generate_motion("still", 4.0, sample_rate=200.0, seed=78)
        result = C.classify_motion(motion_model, trace)
        assert result.label in motion_model.class_names

    def test_low_confidence_falls_back(self, motion_model):
        trace = generate_motion("walking", 4.0, sample_rate=200.0, seed=80)
        # force the fallback path with an unreachable confidence bar
        result = C.classify_motion(motion_model, trace,
                                   fallback_threshold=0.999999)
        assert result.is_fallback
        assert result.label == "moving"
        confident = C.classify_motion(motion_model, trace)
        assert result.confidence == pytest.approx(confident.confidence)

    def test_unknown_fallback_class_rejected(self, motion_model):
        trace = generate_motion("walking", 4.0, sample_rate=200.0, seed=81)
        with pytest.raises(ValueError, match="fallback"):
            C.classify_motion(motion_model, trace, fallback_class="hovering")

    def test_short_trace_rejected(self, motion_model):
        trace = generate_motion("walking", 1.0, sample_rate=200.0, seed=79)
        with pytest.raises(ValueError, match="at least"):
            C.classify_motion(motion_model, trace)

    def test_checkpoint_round_trip(self, motion_model, tmp_path):
        path = tmp_path / "motion.ckpt"
        motion_model.save(path)
        loaded = C.MotionNet.load(path)
        for (k, a), (_, b) in zip(motion_model.state_dict().items(),
                                  loaded.state_dict().items()):
            assert torch.equal(a, b), k


# ---------------------------------------------------------------- prompt ---

def _mixed_context():
    return C.PromptContext(
        sound_events=(
            C.PlacedEvent(event=C.SoundEvent("keyboard_clicks", 0.82,
                                             reduced_class="household"),
                          placement=C.PLACEMENT_NEAR),
            C.PlacedEvent(event=C.SoundEvent("electric_guitar", 0.55,
                                             reduced_class="music"),
                          placement=C.PLACEMENT_FAR, direction="back"),
        ),
        preliminary_scenario=("office_work", 0.41),
        category_list=CATEGORIES,
        motion_class="sitting_down")


class TestPromptGrammar:
    def test_golden_mixed_distance(self):
        expected = (DATA_DIR / "prompt_mixed_distance.txt").read_bytes()
        assert C.build_prompt(_mixed_context()).encode("utf-8") == expected

    def test_golden_far_with_motion(self):
        ctx = C.PromptContext(
            sound_events=(
                C.PlacedEvent(event=C.SoundEvent("speech_babble", 0.66,
                                                 reduced_class="human_voice"),
                              placement=C.PLACEMENT_FAR, direction="left"),
            ),
            preliminary_scenario=("social_gathering", 0.37),
            category_list=CATEGORIES,
            motion_class="standing_up")
        expected = (DATA_DIR / "prompt_far_motion.txt").read_bytes()
        assert C.build_prompt(ctx).encode("utf-8") == expected

    def test_golden_minimal(self):
        ctx = C.PromptContext(sound_events=(),
                              preliminary_scenario=("tv_time", 0.08),
                              category_list=CATEGORIES, motion_class=None)
        expected = (DATA_DIR / "prompt_minimal.txt").read_bytes()
        assert C.build_prompt(ctx).encode("utf-8") == expected

    def test_build_prompt_is_pure(self):
        a = C.build_prompt(_mixed_context())
        b = C.build_prompt(_mixed_context())
        assert a == b

    def test_near_field_phrasing(self):
        prompt = C.build_prompt(_mixed_context())
        assert ("the household is happening in the near front of the user, "
                "which is likely to be related to human activity.") in prompt
        assert "the music is happening in the back." in prompt
        assert C.MIXED_DISTANCE_NOTE in prompt
        assert "the detected motion is sitting down." in prompt
        assert ("the preliminary scenario estimation is office_work, "
                "0.41.") in prompt

    def test_mixed_note_absent_for_single_placement(self):
        ctx = C.PromptContext(
            sound_events=(
                C.PlacedEvent(event=C.SoundEvent("tv_jingle", 0.75,
                                                 reduced_class="media"),
                              placement=C.PLACEMENT_NEAR),
            ),
            preliminary_scenario=("tv_time", 0.44),
            category_list=CATEGORIES)
        assert C.MIXED_DISTANCE_NOTE not in C.build_prompt(ctx)

    def test_confidence_renders_two_decimals(self):
        ctx = C.PromptContext(sound_events=(),
                              preliminary_scenario=("tv_time", 0.12345),
                              category_list=CATEGORIES)
        assert "tv_time, 0.12." in C.build_prompt(ctx)


class TestQueryGate:
    def test_boundary_is_strict(self):
        assert C.should_query(0.4) is True
        assert C.should_query(0.49999) is True
        assert C.should_query(0.5) is False
        assert C.should_query(0.6) is False
        assert C.should_query(1.0) is False
        assert C.should_query(0.0) is True

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            C.should_query(1.5)
        with pytest.raises(ValueError):
            C.should_query(-0.1)
        with pytest.raises(ValueError):
            C.should_query(float("nan"))


class TestParseResponse:
    def test_exact_match(self):
        assert C.parse_llm_response("kitchen_cooking", CATEGORIES) == \
            "kitchen_cooking"

    def test_case_insensitive_canonicalization(self):
        assert C.parse_llm_response("Kitchen_Cooking", CATEGORIES) == \
            "kitchen_cooking"
        assert C.parse_llm_response("  TV_TIME \n", CATEGORIES) == "tv_time"

    def test_first_line_only(self):
        raw = "office_work\nbecause the keyboard suggests typing"
        assert C.parse_llm_response(raw, CATEGORIES) == "office_work"

    def test_chatty_answer_rejected(self):
        assert C.parse_llm_response("I think maybe cooking", CATEGORIES) is None
        assert C.parse_llm_response("", CATEGORIES) is None
        assert C.parse_llm_response("kitchen cooking", CATEGORIES) is None

    def test_empty_category_list_rejected(self):
        with pytest.raises(ValueError):
            C.parse_llm_response("anything", ())


# ---------------------------------------------------------------- client ---

class TestMockClient:
    def test_rules_match_in_order(self):
        prompt = C.build_prompt(_mixed_context())
        client = C.MockLlmClient(
            CATEGORIES,
            rules=(C.MockRule("music_practice", events=("music",)),
                   C.MockRule("office_work", events=("household",))))
        assert client.complete(prompt) == "music_practice"
        assert client.calls == 1

    def test_motion_condition(self):
        prompt = C.build_prompt(_mixed_context())
        client = C.MockLlmClient(
            CATEGORIES,
            rules=(C.MockRule("housekeeping", events=("music",),
                              motion="standing up"),
                   C.MockRule("tv_time", events=("music",),
                              motion="sitting down")))
        assert client.complete(prompt) == "tv_time"

    def test_echoes_preliminary_without_match(self):
        prompt = C.build_prompt(_mixed_context())
        client = C.MockLlmClient(CATEGORIES)
        assert client.complete(prompt) == "office_work"

    def test_noise_is_deterministic(self):
        prompt = C.build_prompt(_mixed_context())
        a = C.MockLlmClient(CATEGORIES, noise_rate=1.0, seed=3)
        b = C.MockLlmClient(CATEGORIES, noise_rate=1.0, seed=3)
        answers_a = [a.complete(prompt) for _ in range(20)]
        answers_b = [b.complete(prompt) for _ in range(20)]
        assert answers_a == answers_b
        assert set(answers_a) <= set(CATEGORIES)

    def test_unknown_rule_label_rejected(self):
        with pytest.raises(ValueError):
            C.MockLlmClient(CATEGORIES,
                            rules=(C.MockRule("dancing", events=()),))

    def test_parse_prompt_evidence_round_trip(self):
        evidence = C.parse_prompt_evidence(C.build_prompt(_mixed_context()))
        assert tuple(evidence["near_events"]) == ("household",)
        assert tuple(evidence["far_events"]) == (("music", "back"),)
        assert evidence["motion"] == "sitting down"
        assert evidence["preliminary"] == ("office_work", 0.41)


class _CapturingHandler(http.server.BaseHTTPRequestHandler):
    requests: list = []
    status = 200
    payload = {"text": "kitchen_cooking"}

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length).decode("utf-8"))
        type(self).requests.append(
            {"body": body, "auth": self.headers.get("Authorization")})
        self.send_response(type(self).status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(json.dumps(type(self).payload).encode("utf-8"))

    def log_message(self, *args):
        pass


@pytest.fixture()
def wire_server():
    _CapturingHandler.requests = []
    _CapturingHandler.status = 200
    _CapturingHandler.payload = {"text": "kitchen_cooking"}
    server = http.server.HTTPServer(("127.0.0.1", 0), _CapturingHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/complete"
    server.shutdown()
    thread.join(timeout=5)


class TestRemoteClient:
    def test_posts_prompt_and_token(self, wire_server):
        client = C.RemoteLlmClient(endpoint=wire_server, token="sekrit",
                                   backoff_seconds=0.0)
        answer = client.complete("which scenario?", max_tokens=16)
        assert answer == "kitchen_cooking"
        (request,) = _CapturingHandler.requests
        assert request["body"] == {"prompt": "which scenario?",
                                   "max_tokens": 16}
        assert request["auth"] == "Bearer sekrit"

    def test_no_token_no_header(self, wire_server):
        client = C.RemoteLlmClient(endpoint=wire_server, token="",
                                   backoff_seconds=0.0)
        client.complete("hi")
        assert _CapturingHandler.requests[0]["auth"] is None

    def test_server_errors_exhaust_retries(self, wire_server):
        _CapturingHandler.status = 500
        client = C.RemoteLlmClient(endpoint=wire_server, retries=2,
                                   backoff_seconds=0.0)
        with pytest.raises(C.LlmError, match="3 attempts"):
            client.complete("hi")
        assert len(_CapturingHandler.requests) == 3

    def test_missing_text_field_fails_fast(self, wire_server):
        _CapturingHandler.payload = {"answer": "nope"}
        client = C.RemoteLlmClient(endpoint=wire_server, retries=2,
                                   backoff_seconds=0.0)
        with pytest.raises(C.LlmError, match="no 'text'"):
            client.complete("hi")
        assert len(_CapturingHandler.requests) == 1

    def test_endpoint_from_environment(self, wire_server, monkeypatch):
        monkeypatch.setenv("EGOLOG_LLM_ENDPOINT", wire_server)
        monkeypatch.setenv("EGOLOG_LLM_TOKEN", "env-token")
        client = C.RemoteLlmClient(backoff_seconds=0.0)
        client.complete("hi")
        assert _CapturingHandler.requests[0]["auth"] == "Bearer env-token"

    def test_no_endpoint_anywhere_fails(self, monkeypatch):
        monkeypatch.delenv("EGOLOG_LLM_ENDPOINT", raising=False)
        with pytest.raises(C.LlmError, match="EGOLOG_LLM_ENDPOINT"):
            C.RemoteLlmClient()


# ----------------------------------------------------------------- store ---

class TestPseudoLabelStore:
    def test_append_and_round_trip(self, tmp_path):
        store = C.PseudoLabelStore(tmp_path / "labels.ndjson")
        store.append(_record(window_id="w1"))
        store.append(_record(window_id="w2", llm_label="tv_time"))
        assert len(store) == 2
        assert store.verify_chain() == 2
        back = store.records()
        assert [r.window_id for r in back] == ["w1", "w2"]
        assert back[1].llm_label == "tv_time"

    def test_reopen_extends_chain(self, tmp_path):
        path = tmp_path / "labels.ndjson"
        C.PseudoLabelStore(path).append(_record(window_id="w1"))
        second = C.PseudoLabelStore(path)
        second.append(_record(window_id="w2"))
        assert second.verify_chain() == 2

    def test_tampering_detected(self, tmp_path):
        path = tmp_path / "labels.ndjson"
        store = C.PseudoLabelStore(path)
        store.append(_record(window_id="w1"))
        store.append(_record(window_id="w2"))
        lines = path.read_text().splitlines()
        row = json.loads(lines[0])
        row["llm_label"] = "housekeeping"
        lines[0] = json.dumps(row, ensure_ascii=False, sort_keys=True,
                              separators=(",", ":"))
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(C.StoreIntegrityError):
            C.PseudoLabelStore(path).verify_chain()

    def test_category_enforcement(self, tmp_path):
        store = C.PseudoLabelStore(tmp_path / "labels.ndjson",
                                   categories=("tv_time",))
        with pytest.raises(ValueError, match="office_work"):
            store.append(_record(llm_label="office_work"))
        assert len(store) == 0

    def test_genesis_hash(self, tmp_path):
        store = C.PseudoLabelStore(tmp_path / "labels.ndjson")
        assert store.last_hash() == C.GENESIS_HASH


# ----------------------------------------------------- drift + fine-tune ---

@pytest.fixture(scope="module")
def drift_experiment():
    return build_drift_experiment(seed=0)


@pytest.fixture(scope="module")
def drift_outcome(drift_experiment, tmp_path_factory):
    path = tmp_path_factory.mktemp("drift") / "labels.ndjson"
    store = C.PseudoLabelStore(path, categories=DRIFT_SCENARIOS)
    result = run_drift_experiment(drift_experiment, store=store, seed=0)
    result["store_path"] = path
    return result


class TestDriftExperiment:
    def test_query_count_matches_low_confidence_exactly(self, drift_experiment,
                                                        drift_outcome):
        import copy
        probe = copy.deepcopy(drift_experiment.model)
        probe.load_state_dict(drift_experiment.pretrain_state)
        low = sum(aggregate_sequence(probe, w.features).confidence < 0.5
                  for w in drift_experiment.adapt_windows)
        assert drift_outcome["n_queries"] == low
        result = drift_outcome["loop_result"]
        assert sum(1 for o in result.outcomes if o.queried) == low

    def test_fine_tuning_recovers_f1(self, drift_outcome):
        assert drift_outcome["report"].applied
        assert not drift_outcome["report"].rolled_back
        gain = drift_outcome["f1_drift_after"] - drift_outcome["f1_drift_before"]
        assert gain >= 0.02

    def test_drift_actually_hurts(self, drift_outcome):
        assert drift_outcome["f1_clean"] >= \
            drift_outcome["f1_drift_before"] + 0.1

    def test_accepted_labels_hit_the_store(self, drift_outcome):
        store = C.PseudoLabelStore(drift_outcome["store_path"])
        assert store.verify_chain() == drift_outcome["n_records"]
        assert drift_outcome["n_records"] == drift_outcome["n_queries"]

    def test_oracle_rules_answer_correctly(self, drift_experiment,
                                           drift_outcome):
        truth_by_id = {w.window_id: drift_experiment.adapt_truth[k]
                       for k, w in enumerate(drift_experiment.adapt_windows)}
        correct = 0
        for record in drift_outcome["loop_result"].records:
            truth_row = truth_by_id[record.window_id]
            truth_label = DRIFT_SCENARIOS[int(np.argmax(truth_row))]
            correct += record.llm_label == truth_label
        assert correct == len(drift_outcome["loop_result"].records)


class TestFineTune:
    def test_below_minimum_is_bitwise_noop(self, drift_experiment):
        model = drift_experiment.model
        state0 = {k: v.clone() for k, v in model.state_dict().items()}
        records = [_record(window_id="adapt-00000", llm_label="office_work")]
        report = C.fine_tune_local(model, records,
                                   drift_experiment.features_by_id,
                                   drift_experiment.validation_sequences,
                                   drift_experiment.validation_truth)
        assert not report.applied and not report.rolled_back
        assert report.n_records == 1
        for k, v in model.state_dict().items():
            assert torch.equal(state0[k], v), k

    def test_poisoned_labels_roll_back_bitwise(self, drift_experiment,
                                               drift_outcome):
        model = drift_experiment.model
        state0 = {k: v.clone() for k, v in model.state_dict().items()}
        poisoned = [C.PseudoLabelRecord(window_id=r.window_id, prompt=r.prompt,
                                        llm_label="tv_time",
                                        local_label=r.local_label,
                                        local_confidence=r.local_confidence,
                                        timestamp=r.timestamp)
                    for r in drift_outcome["loop_result"].records]
        report = C.fine_tune_local(model, poisoned,
                                   drift_experiment.features_by_id,
                                   drift_experiment.validation_sequences,
                                   drift_experiment.validation_truth,
                                   epochs=30, lr=1e-3, seed=0)
        assert report.rolled_back and not report.applied
        assert report.f1_after < report.f1_before
        for k, v in model.state_dict().items():
            assert torch.equal(state0[k], v), k

    def test_unknown_label_rejected(self, drift_experiment):
        records = [_record(window_id="adapt-00000", llm_label="skydiving")] * 40
        with pytest.raises(ValueError, match="skydiving"):
            C.fine_tune_local(drift_experiment.model, records,
                              drift_experiment.features_by_id,
                              drift_experiment.validation_sequences,
                              drift_experiment.validation_truth)


class _GarbageClient:
    def __init__(self):
        self.calls = 0

    def complete(self, prompt, max_tokens=16):
        self.calls += 1
        return "I think maybe cooking"


class _FailingClient:
    def __init__(self):
        self.calls = 0

    def complete(self, prompt, max_tokens=16):
        self.calls += 1
        raise C.LlmError("socket down")


class TestQueryLoop:
    def test_rejected_responses_audited_never_stored(self, drift_experiment,
                                                     tmp_path):
        store = C.PseudoLabelStore(tmp_path / "labels.ndjson",
                                   categories=DRIFT_SCENARIOS)
        client = _GarbageClient()
        windows = drift_experiment.adapt_windows[:40]
        result = run_query_loop(drift_experiment.model, windows, client,
                                DRIFT_SCENARIOS, store=store,
                                timestamp_fn=lambda: 0.0)
        assert result.n_queries == client.calls
        assert result.records == []
        assert len(store) == 0
        assert len(result.rejected) == result.n_queries
        assert all(o.label == o.local_label for o in result.outcomes)
        assert all(o.source in ("local", "local_fallback")
                   for o in result.outcomes)

    def test_client_failure_falls_back_to_local(self, drift_experiment):
        client = _FailingClient()
        windows = drift_experiment.adapt_windows[:40]
        result = run_query_loop(drift_experiment.model, windows, client,
                                DRIFT_SCENARIOS, timestamp_fn=lambda: 0.0)
        assert result.n_queries == client.calls
        assert len(result.failures) == result.n_queries
        assert result.records == []
        assert all(o.label == o.local_label for o in result.outcomes)

    def test_confident_windows_never_query(self, drift_experiment):
        client = _FailingClient()
        result = run_query_loop(drift_experiment.model,
                                drift_experiment.adapt_windows[:40],
                                client, DRIFT_SCENARIOS, threshold=0.0,
                                timestamp_fn=lambda: 0.0)
        # threshold 0 -> nothing is strictly below it -> zero queries
        assert result.n_queries == 0
        assert client.calls == 0
        assert all(o.source == "local" for o in result.outcomes)

    def test_empty_category_list_rejected(self, drift_experiment):
        with pytest.raises(ValueError):
            run_query_loop(drift_experiment.model,
                           drift_experiment.adapt_windows[:1],
                           _GarbageClient(), ())


class TestDeterminism:
    def test_experiment_build_is_reproducible(self, drift_experiment):
        rebuilt = build_drift_experiment(seed=0)
        for k, reference in drift_experiment.pretrain_state.items():
            assert torch.equal(reference, rebuilt.model.state_dict()[k]), k
        assert np.array_equal(drift_experiment.adapt_truth,
                              rebuilt.adapt_truth)
        for wa, wb in zip(drift_experiment.adapt_windows,
                          rebuilt.adapt_windows):
            assert wa.window_id == wb.window_id
            assert np.array_equal(wa.features, wb.features)
            assert wa.sound_events == wb.sound_events
