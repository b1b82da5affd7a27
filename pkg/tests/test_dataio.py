import json

import numpy as np
import pytest

from signdetect.dataio import (
    GlossSegments, SynthConfig, label_fraction, labels_from_gloss,
    load_features, load_gloss_csv, load_pose_file, save_features, synth_corpus,
    synth_labeled_corpus, write_gloss_csv, write_pose_file,
)
from signdetect.errors import CorruptFeatureFile, MissingFps, ParseError
from signdetect.pose_features import PointSubset, PoseSequence, extract_features


def pose_doc(frames, fps=50.0, source="clip01#a"):
    return {"fps": fps, "id": source, "frames": frames}


def person(base=0.0):
    return {
        "pose_keypoints_2d": [base + i * 0.1 for i in range(75)],
        "face_keypoints_2d": [base + i * 0.1 for i in range(210)],
        "hand_left_keypoints_2d": [base + i * 0.1 for i in range(63)],
        "hand_right_keypoints_2d": [base + i * 0.1 for i in range(63)],
    }


class TestLoadPoseFile:
    def test_part_counts_give_137_landmarks(self, tmp_path):
        path = tmp_path / "clip.pose.json"
        path.write_text(json.dumps(pose_doc([{"people": [person()]}] * 3)))
        seq = load_pose_file(path)
        assert seq.frames.shape == (3, 137, 3)
        assert seq.fps == 50.0
        assert seq.source_id == "clip01#a"
        # body slot 1 holds values 3..5 of the flat body array
        np.testing.assert_allclose(seq.frames[0, 1], [0.3, 0.4, 0.5])
        # face starts after the 25 body landmarks
        np.testing.assert_allclose(seq.frames[0, 25], [0.0, 0.1, 0.2])

    def test_empty_people_is_all_missing_and_flow_zero(self, tmp_path):
        frames = [{"people": [person(1.0)]}, {"people": []}, {"people": [person(2.0)]}]
        path = tmp_path / "clip.pose.json"
        path.write_text(json.dumps(pose_doc(frames)))
        seq = load_pose_file(path)
        assert (seq.frames[1, :, 2] == 0).all()
        feats = extract_features(seq, PointSubset.POSE_ALL)
        assert not feats[1].any() and not feats[2].any()

    def test_wrong_body_count_names_frame(self, tmp_path):
        bad = person()
        bad["pose_keypoints_2d"] = bad["pose_keypoints_2d"][:74]
        path = tmp_path / "clip.pose.json"
        path.write_text(json.dumps(pose_doc([{"people": [person()]}, {"people": [bad]}])))
        with pytest.raises(ParseError, match="frame 1"):
            load_pose_file(path)

    def test_missing_fps(self, tmp_path):
        doc = pose_doc([{"people": [person()]}])
        del doc["fps"]
        path = tmp_path / "clip.pose.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(MissingFps):
            load_pose_file(path)
        assert load_pose_file(path, fps=25.0).fps == 25.0

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "clip.pose.json"
        path.write_text("{nope")
        with pytest.raises(ParseError):
            load_pose_file(path)

    def test_non_positive_header_fps(self, tmp_path):
        path = tmp_path / "clip.pose.json"
        path.write_text(json.dumps({"fps": -5, "frames": [{"people": []}]}))
        with pytest.raises(ParseError, match="header"):
            load_pose_file(path)

    def test_round_trip_through_writer(self, tmp_path):
        rng = np.random.default_rng(0)
        frames = rng.normal(0, 2, (4, 137, 3)).round(4)
        frames[:, :, 2] = 1.0
        seq = PoseSequence(frames, fps=50.0, source_id="rt#a")
        path = tmp_path / "rt.pose.json"
        write_pose_file(seq, path)
        back = load_pose_file(path)
        np.testing.assert_allclose(back.frames, seq.frames, atol=1e-6)
        assert back.source_id == "rt#a"


class TestGlossLabels:
    def test_one_second_segment_at_50fps(self):
        labels = labels_from_gloss(GlossSegments([(0.0, 1000.0)]), 60, 50.0)
        assert labels[:50].sum() == 50
        assert labels[50:].sum() == 0

    def test_no_segments(self):
        assert labels_from_gloss(GlossSegments([]), 10, 50.0).sum() == 0

    def test_overlap_is_union(self):
        a = labels_from_gloss(GlossSegments([(0.0, 500.0), (300.0, 900.0)]), 60, 50.0)
        b = labels_from_gloss(GlossSegments([(0.0, 900.0)]), 60, 50.0)
        np.testing.assert_array_equal(a, b)

    def test_csv_round_trip(self, tmp_path):
        segments = GlossSegments([(0.0, 1234.5), (2000.0, 2500.0)])
        path = tmp_path / "g.csv"
        write_gloss_csv(segments, path)
        assert load_gloss_csv(path).segments == segments.segments

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            GlossSegments([(5.0, 5.0)])


class TestFeatureFile:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        feats = rng.normal(0, 5, (30, 8)).astype(np.float32)
        labels = rng.integers(0, 2, 30).astype(np.uint8)
        path = tmp_path / "x.sgnf"
        save_features(feats, labels, 50.0, path)
        seq = load_features(path)
        np.testing.assert_array_equal(seq.features, feats)
        np.testing.assert_array_equal(seq.labels, labels)
        assert seq.fps == 50.0
        assert seq.source_id == "x"
        save_features(seq.features, seq.labels, seq.fps, tmp_path / "y.sgnf")
        assert (tmp_path / "y.sgnf").read_bytes() == path.read_bytes()

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "x.sgnf"
        save_features(np.ones((4, 3), np.float32), np.zeros(4, np.uint8), 50.0, path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(CorruptFeatureFile):
            load_features(path)

    def test_empty_matrix_valid(self, tmp_path):
        path = tmp_path / "empty.sgnf"
        save_features(np.zeros((0, 25), np.float32), np.zeros(0, np.uint8), 50.0, path)
        seq = load_features(path)
        assert seq.features.shape == (0, 25)
        assert len(seq.labels) == 0

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.sgnf"
        save_features(np.ones((2, 2), np.float32), np.zeros(2, np.uint8), 50.0, path)
        blob = bytearray(path.read_bytes())
        blob[0] = ord("X")
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptFeatureFile):
            load_features(path)

    def test_non_binary_label_byte(self, tmp_path):
        path = tmp_path / "x.sgnf"
        save_features(np.ones((2, 2), np.float32), np.zeros(2, np.uint8), 50.0, path)
        blob = bytearray(path.read_bytes())
        blob[-1] = 7
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptFeatureFile):
            load_features(path)


class TestSynthCorpus:
    def test_same_seed_bit_identical(self):
        a = synth_corpus(SynthConfig(seed=5, sequences=3))
        b = synth_corpus(SynthConfig(seed=5, sequences=3))
        for (seq_a, seg_a), (seq_b, seg_b) in zip(a, b):
            np.testing.assert_array_equal(seq_a.frames, seq_b.frames)
            assert seg_a.segments == seg_b.segments
            assert seq_a.source_id == seq_b.source_id

    def test_quiet_spans_are_static_without_noise(self):
        cfg = SynthConfig(seed=6, sequences=4, ambient_rate_per_hour=0.0, noise_scale=0.0)
        for seq, segments in synth_corpus(cfg):
            labels = labels_from_gloss(segments, len(seq), seq.fps)
            feats = extract_features(seq, PointSubset.POSE_ALL)
            quiet = np.flatnonzero(labels == 0)
            # skip the single transition frame that follows a signing span
            interior = quiet[(quiet == 0) | (labels[np.maximum(quiet - 1, 0)] == 0)]
            assert not feats[interior].any()

    def test_label_fraction_near_51(self):
        corpus = synth_corpus(SynthConfig(seed=42, sequences=100))
        assert abs(label_fraction(corpus) - 0.51) < 0.05

    def test_fraction_matches_segment_durations_exactly(self):
        # segments are frame-aligned, so the midpoint rule must reproduce them
        corpus = synth_corpus(SynthConfig(seed=8, sequences=5))
        for seq, segments in corpus:
            labels = labels_from_gloss(segments, len(seq), seq.fps)
            from_segments = sum(e - s for s, e in segments) / 1000.0 * seq.fps
            assert int(labels.sum()) == int(round(from_segments))

    def test_labeled_corpus_shapes(self):
        corpus = synth_labeled_corpus(SynthConfig(seed=9, sequences=2), PointSubset.POSE_BODY)
        for seq in corpus:
            assert seq.features.shape[1] == 25
            assert seq.features.shape[0] == len(seq.labels)
            assert seq.fps == 50.0
            assert "#" in seq.source_id

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SynthConfig(signing_amplitude=0.2, ambient_amplitude=0.5)
        with pytest.raises(ValueError):
            SynthConfig(mean_signing_s=-1.0)
