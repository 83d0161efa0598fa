"""Tests for token-fusion activity recognition."""

import itertools
import warnings

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from daylog.checkpoint import CheckpointError
from daylog.har import (ACTIVITY_CLASSES, ACTIVITY_DEFS, HAR_WINDOW_SECONDS,
                        SCENARIO_CLASSES, SCENARIO_CONFUSABLE_PAIRS,
                        ActivityPrediction, FusedFeature, HarClassifier,
                        ModalityToken, ScenarioTextEmbedder,
                        build_activity_set, build_tokens, classify_activity,
                        classify_window, evaluate_har, extract_near_field,
                        fuse, interference_policy, load_har_classifier,
                        read_activity_vocab, read_per_class_accuracy_csv,
                        render_activity_window, save_har_classifier,
                        scenario_text_embedding, train_activity_model,
                        train_har, write_activity_vocab,
                        write_per_class_accuracy_csv)
from daylog.har.types import (MODE_FULL_MULTIMODAL, MODE_IMU_ONLY)
from daylog.signals.events import generate_event
from daylog.signals.motions import generate_motion
from daylog.signals.render import render_binaural
from daylog.signals.scene import Scene, SourceSpec, Trajectory
from daylog.signals.types import AudioClip
from daylog.signals.motions import ImuSequence
from daylog.spatial.types import GATE_AUDIO_OK, GATE_FAR_FIELD
from daylog.temporal.types import Embedding


def small_model(seed=0, scenario_names=SCENARIO_CLASSES):
    torch.manual_seed(seed)
    return HarClassifier(ACTIVITY_CLASSES, scenario_names,
                         width=32, n_heads=4, feedforward=64)


def random_embedding(modality, seed, width=32):
    rng = np.random.default_rng(seed)
    return Embedding(values=rng.normal(size=width), modality=modality)


def render_clip(event, seed, duration=HAR_WINDOW_SECONDS):
    signal = generate_event(event, duration, 48000.0, seed=seed)
    scene = Scene(
        sources=[SourceSpec(position=(0.9, 0.2), signal=signal,
                            event_class=event, gain=0.8)],
        trajectory=Trajectory.stationary(heading=0.0, duration=duration),
        noise_floor=0.004)
    return render_binaural(scene, duration, seed=seed, sample_rate=48000.0)


class TestTypes:
    def test_activity_prediction_contract(self):
        probs = np.full(12, 1.0 / 12)
        probs[3] = probs[3] + 0.0  # uniform
        pred = ActivityPrediction(probabilities=probs,
                                  class_names=ACTIVITY_CLASSES)
        assert pred.top1 == int(np.argmax(probs))
        assert pred.confidence == pytest.approx(1.0 / 12)
        assert pred.top1_name == ACTIVITY_CLASSES[pred.top1]

    def test_activity_prediction_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            ActivityPrediction(probabilities=np.full(12, 0.1))

    def test_activity_prediction_rejects_name_mismatch(self):
        with pytest.raises(ValueError, match="name count"):
            ActivityPrediction(probabilities=np.full(4, 0.25),
                               class_names=("a", "b"))

    def test_fused_feature_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="non-finite"):
            FusedFeature(values=np.array([1.0, np.nan]))

    def test_token_value_is_feature_plus_modality_embedding(self):
        feat = random_embedding("audio", 1)
        emb = np.arange(32, dtype=np.float64)
        token = ModalityToken(feature=feat, modality_embedding=emb)
        assert np.array_equal(token.value, feat.values + emb)
        assert token.modality == "audio"

    def test_token_rejects_width_mismatch(self):
        with pytest.raises(ValueError, match="width"):
            ModalityToken(feature=random_embedding("imu", 2),
                          modality_embedding=np.zeros(16))


class TestScenarioEmbedder:
    def test_same_label_is_bitwise_identical(self):
        embedder = ScenarioTextEmbedder(SCENARIO_CLASSES, width=32)
        a = scenario_text_embedding(embedder, "office_work")
        b = scenario_text_embedding(embedder, "office_work")
        assert np.array_equal(a.values, b.values)
        assert a.modality == "text"
        assert a.is_unit()

    def test_multi_label_is_renormalized_mean(self):
        embedder = ScenarioTextEmbedder(SCENARIO_CLASSES, width=32)
        both = scenario_text_embedding(embedder,
                                       ["office_work", "workshop"])
        assert both.is_unit()
        idx = [SCENARIO_CLASSES.index("office_work"),
               SCENARIO_CLASSES.index("workshop")]
        with torch.no_grad():
            rows = embedder.table.weight.numpy()[idx]
        mean = rows.mean(axis=0)
        expected = mean / np.linalg.norm(mean)
        assert both.values == pytest.approx(expected, abs=1e-6)

    def test_unknown_label_warns_and_uses_shared_row(self):
        embedder = ScenarioTextEmbedder(SCENARIO_CLASSES, width=32)
        with pytest.warns(RuntimeWarning, match="out-of-vocabulary"):
            a = scenario_text_embedding(embedder, "space_walk")
        with pytest.warns(RuntimeWarning, match="out-of-vocabulary"):
            b = scenario_text_embedding(embedder, "deep_sea_dive")
        assert np.array_equal(a.values, b.values)

    def test_empty_label_list_raises(self):
        embedder = ScenarioTextEmbedder(SCENARIO_CLASSES, width=32)
        with pytest.raises(ValueError, match="no scenario labels"):
            embedder([])

    def test_duplicate_vocabulary_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            ScenarioTextEmbedder(("kitchen", "kitchen"), width=32)


class TestBuildTokens:
    def test_zero_feature_token_equals_modality_embedding(self):
        model = small_model()
        zero = Embedding(values=np.zeros(32), modality="imu")
        token = build_tokens(model, imu=zero)[0]
        expected = model.modality_embeddings["imu"].detach().numpy()
        assert np.array_equal(token.value, expected.astype(np.float64))

    def test_slot_modality_mismatch_raises(self):
        model = small_model()
        with pytest.raises(ValueError, match="slot received"):
            build_tokens(model, audio=random_embedding("imu", 3))

    def test_width_mismatch_raises(self):
        model = small_model()
        with pytest.raises(ValueError, match="width"):
            build_tokens(model, audio=random_embedding("audio", 3, width=8))

    def test_no_embeddings_raise(self):
        with pytest.raises(ValueError, match="nothing to fuse"):
            build_tokens(small_model())


class TestFuse:
    def test_bitwise_invariant_to_token_order(self):
        model = small_model()
        tokens = build_tokens(
            model,
            audio=random_embedding("audio", 1),
            imu=random_embedding("imu", 2),
            scenario=scenario_text_embedding(model.scenario_embedder,
                                             "workshop"))
        reference = fuse(model, tokens).values
        for perm in itertools.permutations(tokens):
            assert np.array_equal(fuse(model, list(perm)).values, reference)

    def test_single_token_fusion_works(self):
        model = small_model()
        tokens = build_tokens(model, imu=random_embedding("imu", 5))
        fused = fuse(model, tokens)
        assert fused.width == model.width

    def test_empty_token_list_raises(self):
        with pytest.raises(ValueError, match="empty token list"):
            fuse(small_model(), [])

    def test_duplicate_modalities_raise(self):
        model = small_model()
        token = build_tokens(model, audio=random_embedding("audio", 1))[0]
        with pytest.raises(ValueError, match="duplicate"):
            fuse(model, [token, token])

    @settings(deadline=None, max_examples=12)
    @given(st.integers(0, 2 ** 31 - 1),
           st.lists(st.sampled_from(["audio", "imu", "text"]),
                    min_size=1, max_size=3, unique=True),
           st.randoms(use_true_random=False))
    def test_any_subset_any_order_is_bitwise_stable(self, seed, modalities,
                                                    shuffler):
        model = small_model()
        kwargs = {}
        for i, modality in enumerate(modalities):
            slot = {"audio": "audio", "imu": "imu",
                    "text": "scenario"}[modality]
            kwargs[slot] = random_embedding(modality, seed + i)
        tokens = build_tokens(model, **kwargs)
        reference = fuse(model, tokens).values
        shuffled = list(tokens)
        shuffler.shuffle(shuffled)
        assert np.array_equal(fuse(model, shuffled).values, reference)


class TestClassifyActivity:
    def test_softmax_distribution_with_names(self):
        model = small_model()
        fused = fuse(model, build_tokens(model,
                                         imu=random_embedding("imu", 9)))
        pred = classify_activity(model, fused)
        assert pred.class_names == ACTIVITY_CLASSES
        assert pred.probabilities.sum() == pytest.approx(1.0, abs=1e-5)
        assert 0.0 <= pred.confidence <= 1.0

    def test_width_mismatch_raises(self):
        with pytest.raises(ValueError, match="width"):
            classify_activity(small_model(),
                              FusedFeature(values=np.zeros(7)))


class TestInterferencePolicy:
    def test_gate_mapping(self):
        assert interference_policy(GATE_AUDIO_OK) == MODE_FULL_MULTIMODAL
        assert interference_policy(GATE_FAR_FIELD) == MODE_IMU_ONLY

    def test_unknown_gate_raises(self):
        with pytest.raises(ValueError, match="unknown gate"):
            interference_policy("sideways")

    def test_extract_near_field_is_identity(self):
        clip = render_clip("speech_babble", seed=2, duration=1.0)
        out = extract_near_field(clip)
        assert out is clip


class TestClassifyWindow:
    def test_full_window_prediction(self):
        model = small_model()
        clip = render_clip("keyboard_clicks", seed=3)
        imu = generate_motion("typing", HAR_WINDOW_SECONDS,
                              sample_rate=200.0, seed=3)
        pred = classify_window(model, clip, imu, scenarios="office_work")
        assert pred.probabilities.shape == (len(ACTIVITY_CLASSES),)
        assert pred.probabilities.sum() == pytest.approx(1.0, abs=1e-9)

    def test_far_gate_is_bitwise_invariant_to_audio_content(self):
        model = small_model()
        imu = generate_motion("scrubbing", HAR_WINDOW_SECONDS,
                              sample_rate=200.0, seed=4)
        loud = render_clip("vacuum_hum", seed=5)
        other = render_clip("speech_babble", seed=6)
        p1 = classify_window(model, loud, imu, scenarios="workshop",
                             gate=GATE_FAR_FIELD)
        p2 = classify_window(model, other, imu, scenarios="workshop",
                             gate=GATE_FAR_FIELD)
        assert np.array_equal(p1.probabilities, p2.probabilities)

    def test_audio_ok_gate_depends_on_audio(self):
        model = small_model()
        imu = generate_motion("scrubbing", HAR_WINDOW_SECONDS,
                              sample_rate=200.0, seed=4)
        loud = render_clip("vacuum_hum", seed=5)
        other = render_clip("speech_babble", seed=6)
        p1 = classify_window(model, loud, imu, gate=GATE_AUDIO_OK)
        p2 = classify_window(model, other, imu, gate=GATE_AUDIO_OK)
        assert not np.array_equal(p1.probabilities, p2.probabilities)

    def test_short_input_is_padded(self):
        model = small_model()
        clip = render_clip("page_turn", seed=7, duration=2.0)
        imu = generate_motion("still", 2.0, sample_rate=200.0, seed=7)
        pred = classify_window(model, clip, imu)
        assert pred.probabilities.sum() == pytest.approx(1.0, abs=1e-9)

    def test_long_input_is_windowed_not_truncated(self):
        model = small_model()
        clip = render_clip("water_running", seed=8, duration=12.0)
        imu = generate_motion("scrubbing", 12.0, sample_rate=200.0, seed=8)
        pred = classify_window(model, clip, imu)
        assert pred.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        # A 12 s input averages three pieces: its prediction must differ
        # from using only the first 5 s piece.
        first = AudioClip(samples=clip.samples[:, :240000],
                          sample_rate=48000.0)
        imu_first = ImuSequence(samples=imu.samples[:, :1000],
                                sample_rate=200.0)
        head = classify_window(model, first, imu_first)
        assert not np.array_equal(pred.probabilities, head.probabilities)

    def test_mismatched_spans_raise(self):
        model = small_model()
        clip = render_clip("water_running", seed=9, duration=5.0)
        imu = generate_motion("scrubbing", 2.0, sample_rate=200.0, seed=9)
        with pytest.raises(ValueError, match="different spans"):
            classify_window(model, clip, imu)


class TestFarFieldGradients:
    def test_far_batch_leaves_audio_encoder_untouched(self):
        torch.manual_seed(0)
        rng = np.random.default_rng(0)
        w = [render_activity_window(c, rng) for c in (0, 3, 6, 9)]
        dataset = {
            "audio": np.stack([x["audio"] for x in w]).astype(np.float32),
            "imu": np.stack([x["imu"] for x in w]).astype(np.float32),
            "labels": np.array([x["label"] for x in w], dtype=np.int64),
            "scenarios": [x["scenario"] for x in w],
            "gates": [GATE_FAR_FIELD] * 4,
            "activity_names": ACTIVITY_CLASSES,
            "scenario_names": SCENARIO_CLASSES,
        }
        model = small_model()
        train_har(model, dataset, epochs=1, batch_size=4, seed=0)
        audio_grads = [p.grad for p in model.audio_encoder.parameters()]
        assert all(g is None or float(torch.abs(g).max()) == 0.0
                   for g in audio_grads)
        imu_grads = [p.grad for p in model.imu_encoder.parameters()]
        assert any(g is not None and float(torch.abs(g).max()) > 0.0
                   for g in imu_grads)

    def test_mixed_batch_routes_audio_only_from_ok_windows(self):
        torch.manual_seed(0)
        rng = np.random.default_rng(1)
        w = [render_activity_window(c, rng) for c in (0, 3)]
        dataset = {
            "audio": np.stack([x["audio"] for x in w]).astype(np.float32),
            "imu": np.stack([x["imu"] for x in w]).astype(np.float32),
            "labels": np.array([x["label"] for x in w], dtype=np.int64),
            "scenarios": [x["scenario"] for x in w],
            "gates": [GATE_AUDIO_OK, GATE_FAR_FIELD],
            "activity_names": ACTIVITY_CLASSES,
            "scenario_names": SCENARIO_CLASSES,
        }
        model = small_model()
        train_har(model, dataset, epochs=1, batch_size=2, seed=0)
        audio_grads = [p.grad for p in model.audio_encoder.parameters()]
        assert any(g is not None and float(torch.abs(g).max()) > 0.0
                   for g in audio_grads)


class TestVocabularyFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "activities.txt"
        write_activity_vocab(path, ACTIVITY_CLASSES)
        names = read_activity_vocab(path)
        assert names == ACTIVITY_CLASSES
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ACTIVITY_CLASSES[0]
        assert len(lines) == len(ACTIVITY_CLASSES)

    def test_duplicates_rejected_on_read(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("typing\ntyping\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            read_activity_vocab(path)

    def test_blank_line_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("typing\n\nreading\n", encoding="utf-8")
        with pytest.raises(ValueError, match="blank"):
            read_activity_vocab(path)

    def test_write_rejects_duplicates(self, tmp_path):
        with pytest.raises(ValueError, match="duplicate"):
            write_activity_vocab(tmp_path / "v.txt", ["a", "a"])


class TestPerClassCsv:
    def test_round_trip_including_empty_support(self, tmp_path):
        path = tmp_path / "per_class.csv"
        per_class = np.array([0.5, np.nan, 1.0])
        support = np.array([4, 0, 2])
        write_per_class_accuracy_csv(path, ("a", "b", "c"), per_class,
                                     support)
        back = read_per_class_accuracy_csv(path)
        assert back["class_names"] == ("a", "b", "c")
        assert np.array_equal(back["support"], support)
        assert back["per_class"][0] == pytest.approx(0.5)
        assert np.isnan(back["per_class"][1])

    def test_length_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="disagree"):
            write_per_class_accuracy_csv(tmp_path / "x.csv", ("a",),
                                         np.array([0.5, 0.5]),
                                         np.array([1, 1]))


class TestCheckpoint:
    def test_round_trip_is_bitwise(self, tmp_path):
        model = small_model(seed=3)
        clip = render_clip("speech_babble", seed=10)
        imu = generate_motion("still", HAR_WINDOW_SECONDS,
                              sample_rate=200.0, seed=10)
        before = classify_window(model, clip, imu,
                                 scenarios="living_room_leisure")
        path = tmp_path / "har.pt"
        save_har_classifier(path, model)
        loaded = load_har_classifier(path)
        after = classify_window(loaded, clip, imu,
                                scenarios="living_room_leisure")
        assert np.array_equal(before.probabilities, after.probabilities)
        assert loaded.activity_names == model.activity_names
        assert loaded.scenario_names == model.scenario_names

    def test_wrong_kind_rejected(self, tmp_path):
        from daylog.checkpoint import save_checkpoint
        path = tmp_path / "other.pt"
        save_checkpoint(path, "something_else", {}, {})
        with pytest.raises(CheckpointError, match="kind"):
            load_har_classifier(path)


class TestCorpusDesign:
    def test_twelve_balanced_classes(self):
        assert len(ACTIVITY_CLASSES) == 12
        assert len(set(ACTIVITY_CLASSES)) == 12
        scenario_counts = {}
        for _, _, _, scenario in ACTIVITY_DEFS:
            scenario_counts[scenario] = scenario_counts.get(scenario, 0) + 1
        # No scenario label identifies an activity on its own.
        assert all(count >= 2 for count in scenario_counts.values())

    def test_confusable_pairs_share_signals_but_not_scenarios(self):
        defs = {d[0]: d for d in ACTIVITY_DEFS}
        for a, b in SCENARIO_CONFUSABLE_PAIRS:
            assert defs[a][1] == defs[b][1]   # same sound event
            assert defs[a][2] == defs[b][2]   # same motion
            assert defs[a][3] != defs[b][3]   # different scenario

    def test_build_set_is_balanced_and_typed(self):
        data = build_activity_set(1, seed=0)
        assert data["audio"].shape == (12, 64, 500)
        assert data["imu"].shape == (12, 6, 1000)
        assert sorted(data["labels"].tolist()) == list(range(12))
        assert data["audio"].dtype == np.float32
        assert all(g == GATE_AUDIO_OK for g in data["gates"])

    def test_build_set_is_reproducible(self):
        a = build_activity_set(1, seed=7)
        b = build_activity_set(1, seed=7)
        assert np.array_equal(a["audio"], b["audio"])
        assert np.array_equal(a["imu"], b["imu"])


@pytest.fixture(scope="session")
def trained_har():
    """One scenario-aware classifier trained on the activity corpus."""
    train_set = build_activity_set(24, seed=11)
    test_set = build_activity_set(8, seed=12)
    model, history = train_activity_model(train_set, "multimodal_scenario",
                                          seed=0, epochs=30, lr=1e-3)
    return {"model": model, "history": history, "train_set": train_set,
            "test_set": test_set}


class TestTrainedClassifier:
    def test_loss_decreases(self, trained_har):
        history = trained_har["history"]
        assert history[-1] < 0.5 * history[0]

    def test_heldout_accuracy_at_least_85(self, trained_har):
        report = evaluate_har(trained_har["model"], trained_har["test_set"])
        assert report["accuracy"] >= 0.85

    def test_per_class_csv_covers_every_activity(self, trained_har,
                                                 tmp_path):
        report = evaluate_har(trained_har["model"], trained_har["test_set"])
        path = tmp_path / "per_class.csv"
        write_per_class_accuracy_csv(path, report["class_names"],
                                     report["per_class"],
                                     report["support"])
        back = read_per_class_accuracy_csv(path)
        assert back["class_names"] == ACTIVITY_CLASSES
        assert int(back["support"].sum()) == len(
            trained_har["test_set"]["labels"])

    def test_trained_scenario_embeddings_stay_distinct(self, trained_har):
        embedder = trained_har["model"].scenario_embedder
        vectors = [scenario_text_embedding(embedder, name).values
                   for name in SCENARIO_CLASSES]
        for i in range(len(vectors)):
            for j in range(i + 1, len(vectors)):
                cosine = float(np.dot(vectors[i], vectors[j]))
                assert cosine < 0.99

    def test_confusable_pairs_need_the_scenario_token(self, trained_har):
        """Dropping the text token collapses the scenario-confusable pairs."""
        model = trained_har["model"]
        test_set = trained_har["test_set"]
        from daylog.har import predict_labels
        with_text = predict_labels(model, test_set, "multimodal_scenario")
        without = predict_labels(model, test_set, "multimodal")
        labels = test_set["labels"]
        pair_idx = [ACTIVITY_CLASSES.index(n)
                    for pair in SCENARIO_CONFUSABLE_PAIRS for n in pair]
        mask = np.isin(labels, pair_idx)
        acc_with = float((with_text[mask] == labels[mask]).mean())
        acc_without = float((without[mask] == labels[mask]).mean())
        assert acc_with > acc_without
