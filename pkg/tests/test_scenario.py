import pytest

from gesturekit.backend import PERFORMABLE_LABELS
from gesturekit.errors import InfeasibleScenarioError
from gesturekit.scenario import (
    frame_source,
    generate,
    ground_truth,
    load_toml,
    oracle_backends,
    save_toml,
)


class TestGenerate:
    def test_deterministic(self):
        a = generate(4, duration_frames=600, seed=7)
        b = generate(4, duration_frames=600, seed=7)
        assert a == b

    def test_different_seeds_differ(self):
        a = generate(4, duration_frames=600, seed=1)
        b = generate(4, duration_frames=600, seed=2)
        assert a.gestures != b.gestures

    def test_infeasible_packing(self):
        with pytest.raises(InfeasibleScenarioError):
            generate(10, duration_frames=100)

    def test_zero_gestures(self):
        scenario = generate(0, duration_frames=200, seed=3)
        assert scenario.gestures == ()
        assert scenario.detector_script.segments == ()
        assert ground_truth(scenario).labels == ()

    def test_spans_average_around_36(self):
        spans = []
        for seed in range(30):
            scenario = generate(4, duration_frames=600, seed=seed)
            spans += [g.end_frame - g.start_frame + 1 for g in scenario.gestures]
        mean = sum(spans) / len(spans)
        assert 32 <= mean <= 40

    def test_min_gap_honored(self):
        for seed in range(20):
            scenario = generate(4, duration_frames=600, seed=seed)
            for a, b in zip(scenario.gestures, scenario.gestures[1:]):
                assert b.start_frame - a.end_frame - 1 >= 20
            assert scenario.gestures[0].start_frame >= 24
            assert scenario.gestures[-1].end_frame < scenario.duration_frames - 10

    def test_labels_performable(self):
        scenario = generate(8, duration_frames=1200, seed=5)
        for gesture in scenario.gestures:
            assert gesture.label in PERFORMABLE_LABELS

    def test_scripts_coincide_with_gestures(self):
        scenario = generate(4, duration_frames=600, seed=9)
        spans = [(g.start_frame, g.end_frame) for g in scenario.gestures]
        det = [(s.start_frame, s.end_frame) for s in scenario.detector_script.segments]
        cls = [(s.start_frame, s.end_frame) for s in scenario.classifier_script.segments]
        assert spans == det == cls

    def test_invariants_over_many_seeds(self):
        for seed in range(40):
            scenario = generate(4, duration_frames=600, seed=seed, noise_sigma=0.1)
            previous_end = None
            for gesture in scenario.gestures:
                assert gesture.start_frame <= gesture.end_frame
                if previous_end is not None:
                    assert gesture.start_frame > previous_end
                previous_end = gesture.end_frame
            assert len(ground_truth(scenario).labels) == 4


class TestGroundTruth:
    def test_order_preserved(self):
        scenario = generate(4, duration_frames=600, seed=12)
        truth = ground_truth(scenario)
        assert truth.labels == tuple(g.label for g in scenario.gestures)
        assert truth.video_id == scenario.video_id


class TestTomlRoundtrip:
    def test_roundtrip(self, tmp_path):
        scenario = generate(4, duration_frames=600, seed=4, noise_sigma=0.05)
        path = tmp_path / "scenario.toml"
        save_toml(scenario, path)
        loaded = load_toml(path)
        assert loaded == scenario

    def test_roundtrip_empty(self, tmp_path):
        scenario = generate(0, duration_frames=100, seed=4)
        path = tmp_path / "scenario.toml"
        save_toml(scenario, path)
        assert load_toml(path) == scenario


class TestSources:
    def test_frame_source_length_and_indices(self):
        scenario = generate(2, duration_frames=300, seed=1)
        frames = list(frame_source(scenario))
        assert len(frames) == 300
        assert [f.index for f in frames[:3]] == [0, 1, 2]
        assert frames[-1].index == 299

    def test_oracle_backends_bound(self):
        scenario = generate(2, duration_frames=300, seed=1)
        detector, classifier = oracle_backends(scenario, 8, 32)
        assert detector.info.clip_depth == 8
        assert detector.info.num_classes == 2
        assert classifier.info.clip_depth == 32
        assert classifier.info.num_classes == 27
