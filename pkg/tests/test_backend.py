import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gesturekit.backend import (
    JESTER_LABELS,
    BackendInfo,
    LabelSet,
    OracleBackend,
    OracleScript,
    OracleSegment,
    ProbabilityVector,
    StubBackend,
    envelope_weight,
    oracle_probabilities,
)
from gesturekit.errors import ShapeMismatchError
from gesturekit.stream import Clip


def make_clip(start, depth=16):
    data = np.zeros((depth, 112, 112, 3), dtype=np.uint8)
    return Clip(depth=depth, start_index=start, data=data)


class TestLabelSets:
    def test_jester_has_27_classes(self):
        assert len(JESTER_LABELS) == 27
        assert len(LabelSet.jester()) == 27

    def test_detector_labels(self):
        assert LabelSet.detector().labels == ("gesture", "no_gesture")

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            LabelSet(id="x", labels=("a", "a"))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            LabelSet(id="x", labels=())


class TestProbabilityVector:
    def test_valid(self):
        ProbabilityVector(values=np.full(27, 1 / 27), label_set_id="jester")

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ProbabilityVector(values=[1.2, -0.2], label_set_id="detector")

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            ProbabilityVector(values=[0.5, 0.6], label_set_id="detector")


class TestBackendInfo:
    def test_rejects_bad_depth(self):
        with pytest.raises(ValueError):
            BackendInfo(2, 12, 112, LabelSet.detector())

    def test_rejects_bad_input_size(self):
        with pytest.raises(ValueError):
            BackendInfo(2, 8, 224, LabelSet.detector())


class TestOracleScript:
    def test_overlapping_segments_rejected(self):
        with pytest.raises(ValueError):
            OracleScript(
                segments=(
                    OracleSegment(0, 10, 0, 1.0),
                    OracleSegment(5, 20, 1, 1.0),
                )
            )

    def test_unsorted_segments_rejected(self):
        with pytest.raises(ValueError):
            OracleScript(
                segments=(
                    OracleSegment(20, 30, 0, 1.0),
                    OracleSegment(0, 10, 1, 1.0),
                )
            )


class TestEnvelope:
    def test_no_ramp_is_flat(self):
        seg = OracleSegment(10, 20, 0, 1.0)
        assert envelope_weight(seg, 10, 0) == 1.0
        assert envelope_weight(seg, 20, 0) == 1.0
        assert envelope_weight(seg, 9, 0) == 0.0

    def test_ramp_shape(self):
        seg = OracleSegment(10, 50, 0, 1.0)
        ramp = 4
        assert envelope_weight(seg, 10, ramp) == pytest.approx(1 / 5)
        assert envelope_weight(seg, 13, ramp) == pytest.approx(4 / 5)
        assert envelope_weight(seg, 14, ramp) == 1.0
        assert envelope_weight(seg, 46, ramp) == 1.0
        assert envelope_weight(seg, 50, ramp) == pytest.approx(1 / 5)


class TestOracleProbabilities:
    def test_full_coverage_peak_one_is_one_hot(self):
        script = OracleScript(segments=(OracleSegment(0, 100, 7, 1.0),))
        probs = oracle_probabilities(script, 20, 16, 27)
        assert probs[7] == pytest.approx(1.0)
        assert probs.sum() == pytest.approx(1.0)

    def test_outside_segments_is_uniform(self):
        script = OracleScript(segments=(OracleSegment(500, 600, 3, 1.0),))
        probs = oracle_probabilities(script, 0, 16, 27)
        np.testing.assert_allclose(probs, np.full(27, 1 / 27))

    def test_half_coverage_formula(self):
        # Clip of 8 with 4 frames inside a no-ramp segment at peak 0.9:
        # q = 0.5 * 0.9 = 0.45, target = q + (1-q)/27, others (1-q)/27.
        script = OracleScript(segments=(OracleSegment(100, 200, 5, 0.9),))
        probs = oracle_probabilities(script, 96, 8, 27)
        expected_target = 0.45 + 0.55 / 27
        expected_other = 0.55 / 27
        assert probs[5] == pytest.approx(expected_target, abs=1e-12)
        others = np.delete(probs, 5)
        np.testing.assert_allclose(others, expected_other)
        assert expected_target == pytest.approx(0.470, abs=5e-4)
        assert expected_other == pytest.approx(0.0204, abs=5e-5)

    def test_ramp_attenuates_edge_coverage(self):
        # 8-frame clip starting exactly at a ramp-4 segment edge:
        # weights 1/5..4/5 then 1s, coverage (0.2+0.4+0.6+0.8+4)/8 = 0.75.
        script = OracleScript(segments=(OracleSegment(10, 50, 2, 1.0),), envelope_ramp=4)
        probs = oracle_probabilities(script, 10, 8, 27)
        q = 0.75
        assert probs[2] == pytest.approx(q + (1 - q) / 27, abs=1e-12)

    def test_deterministic_with_noise(self):
        script = OracleScript(
            segments=(OracleSegment(0, 100, 1, 0.9),), noise_sigma=0.1, seed=42
        )
        a = oracle_probabilities(script, 10, 16, 27)
        b = oracle_probabilities(script, 10, 16, 27)
        np.testing.assert_array_equal(a, b)
        c = oracle_probabilities(script, 11, 16, 27)
        assert not np.array_equal(a, c)

    def test_nucleus_coverage_reaches_peak(self):
        # Segment longer than depth + 2*ramp: some clip position attains
        # coverage 1, so the target probability reaches the peak.
        depth, ramp = 16, 4
        script = OracleScript(
            segments=(OracleSegment(100, 100 + depth + 2 * ramp + 2, 9, 0.8),),
            envelope_ramp=ramp,
        )
        best = max(
            oracle_probabilities(script, start, depth, 27)[9]
            for start in range(90, 130)
        )
        assert best >= 0.8

    @settings(max_examples=60, deadline=None)
    @given(
        start=st.integers(min_value=0, max_value=300),
        depth=st.sampled_from([8, 16, 32]),
        sigma=st.floats(min_value=0.0, max_value=0.5),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_always_valid_probability_vector(self, start, depth, sigma, seed):
        script = OracleScript(
            segments=(
                OracleSegment(50, 90, 3, 0.9),
                OracleSegment(120, 170, 11, 0.7),
            ),
            noise_sigma=sigma,
            seed=seed,
            envelope_ramp=4,
        )
        probs = oracle_probabilities(script, start, depth, 27)
        ProbabilityVector(values=probs, label_set_id="jester")  # invariants hold


class TestOracleBackend:
    def test_scripted_segment_one_hot(self):
        script = OracleScript(segments=(OracleSegment(0, 63, 4, 1.0),))
        backend = OracleBackend(script, LabelSet.jester(), clip_depth=16)
        probs = backend.infer(make_clip(10, 16))
        assert probs.values[4] == pytest.approx(1.0)

    def test_depth_mismatch(self):
        backend = OracleBackend(OracleScript(segments=()), LabelSet.detector(), clip_depth=8)
        with pytest.raises(ShapeMismatchError):
            backend.infer(make_clip(0, 16))

    def test_peak_below_uniform_rejected(self):
        script = OracleScript(segments=(OracleSegment(0, 10, 0, 0.01),))
        with pytest.raises(ValueError):
            OracleBackend(script, LabelSet.jester(), clip_depth=16)

    def test_pure_function_of_start_and_depth(self):
        script = OracleScript(
            segments=(OracleSegment(5, 60, 2, 0.9),), noise_sigma=0.05, seed=7
        )
        backend = OracleBackend(script, LabelSet.jester(), clip_depth=16)
        a = backend.infer(make_clip(12, 16)).values
        b = backend.infer(make_clip(12, 16)).values
        np.testing.assert_array_equal(a, b)


class TestStubBackend:
    def test_uniform_output(self):
        backend = StubBackend(LabelSet.detector(), clip_depth=8)
        probs = backend.infer(make_clip(0, 8))
        np.testing.assert_allclose(probs.values, [0.5, 0.5])
