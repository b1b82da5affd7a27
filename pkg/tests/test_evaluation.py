import itertools

import numpy as np
import pytest

from signdetect.errors import EmptyInput, LengthMismatch
from signdetect.evaluation import (
    SYMMETRIC_TYPE, ErrorType, Span,
    classify_errors, error_report, error_report_csv, extract_spans,
    format_error_report, frame_accuracy, sequence_stats,
)

from _oracles import classify_errors_naive


def bits(value, length):
    return [(value >> (length - 1 - i)) & 1 for i in range(length)]


class TestFrameAccuracy:
    def test_perfect(self):
        assert frame_accuracy([0, 1, 1], [0, 1, 1]) == 1.0

    def test_inverted(self):
        assert frame_accuracy([1, 0, 0], [0, 1, 1]) == 0.0

    def test_three_quarters(self):
        assert frame_accuracy([0, 1, 1, 1], [0, 0, 1, 1]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            frame_accuracy([0, 1], [0, 1, 1])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            frame_accuracy([], [])

    def test_complement_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            gold = rng.integers(0, 2, 30)
            pred = rng.integers(0, 2, 30)
            mismatches = int((gold != pred).sum())
            assert frame_accuracy(pred, gold) == pytest.approx(1.0 - mismatches / 30, abs=1e-12)


class TestExtractSpans:
    def test_example(self):
        assert extract_spans([0, 0, 0, 1, 1, 1]) == [Span(0, 3, 0), Span(3, 6, 1)]

    def test_empty(self):
        assert extract_spans([]) == []

    def test_single(self):
        assert extract_spans([1]) == [Span(0, 1, 1)]

    def test_alternating_labels_cover(self):
        rng = np.random.default_rng(1)
        labels = rng.integers(0, 2, 200)
        spans = extract_spans(labels)
        assert spans[0].start == 0 and spans[-1].end == 200
        for a, b in zip(spans, spans[1:]):
            assert a.end == b.start
            assert a.label != b.label


class TestClassifyErrors:
    def test_bridged(self):
        gold = [1, 1, 1, 0, 0, 0, 1, 1, 1]
        pred = [1] * 9
        events = classify_errors(gold, pred, fps=1.0)
        assert len(events) == 1
        assert events[0].type is ErrorType.BRIDGED
        assert events[0].span == Span(3, 6, 1)
        assert events[0].duration_s == 3.0

    def test_post_signing_and_underflow(self):
        gold = [0, 0, 0, 1, 1, 1, 0, 0, 0]
        pred = [0, 0, 0, 0, 1, 1, 0, 0, 0]
        events = classify_errors(gold, pred, fps=1.0)
        assert [e.type for e in events] == [ErrorType.STARTED_POST_SIGNING]
        gold = [0, 0, 0, 1, 1, 1, 0, 0, 0]
        pred = [0, 0, 0, 0, 1, 0, 0, 0, 0]
        kinds = [e.type for e in classify_errors(gold, pred, fps=1.0)]
        assert kinds == [ErrorType.STARTED_POST_SIGNING, ErrorType.SIGNING_UNDERFLOW]

    def test_whole_sequence_false_positive(self):
        events = classify_errors([0, 0, 0], [1, 1, 1], fps=1.0)
        assert [e.type for e in events] == [ErrorType.SIGNING_DETECTED_INCORRECTLY]

    def test_skipped_needs_interior_span(self):
        events = classify_errors([1, 1, 0], [0, 0, 0], fps=1.0)
        assert [e.type for e in events] == [ErrorType.SIGNING_UNDERFLOW]
        events = classify_errors([0, 1, 1, 0], [0, 0, 0, 0], fps=1.0)
        assert [e.type for e in events] == [ErrorType.SKIPPED]

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            classify_errors([0, 1], [0], fps=1.0)

    def test_exhaustive_short_lengths_match_oracle(self):
        for length in range(0, 7):
            for g in range(2 ** length):
                gold = bits(g, length)
                for p in range(2 ** length):
                    pred = bits(p, length)
                    got = [(e.type, e.span.start, e.span.end)
                           for e in classify_errors(gold, pred, fps=1.0)]
                    assert got == classify_errors_naive(gold, pred)

    def test_partition_property(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            gold = rng.integers(0, 2, 50)
            pred = rng.integers(0, 2, 50)
            events = classify_errors(gold, pred, fps=50.0)
            covered = np.zeros(50, dtype=int)
            for e in events:
                covered[e.span.start:e.span.end] += 1
            np.testing.assert_array_equal(covered, (gold != pred).astype(int))

    def test_symmetry_property(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            gold = rng.integers(0, 2, 40)
            pred = rng.integers(0, 2, 40)
            direct = classify_errors(gold, pred, fps=2.0)
            flipped = classify_errors(1 - gold, 1 - pred, fps=2.0)
            assert len(direct) == len(flipped)
            for a, b in zip(direct, flipped):
                assert b.type is SYMMETRIC_TYPE[a.type]
                assert (a.span.start, a.span.end) == (b.span.start, b.span.end)

    def test_perfect_prediction_no_events(self):
        rng = np.random.default_rng(4)
        gold = rng.integers(0, 2, 100)
        assert classify_errors(gold, gold.copy(), fps=50.0) == []

    def test_durations_use_fps(self):
        events = classify_errors([1, 1, 1, 1], [1, 0, 0, 1], fps=50.0)
        assert events[0].duration_s == pytest.approx(2 / 50)


class TestErrorReport:
    def test_no_events(self):
        rows = error_report([])
        assert len(rows) == 8
        assert all(r.count == 0 and r.mean_s is None and r.std_s is None for r in rows)

    def test_hand_arithmetic(self):
        gold = [1, 0, 1] + [1, 0, 0, 0, 1]
        # two bridged events of 1 s and 3 s at fps 1
        events = (classify_errors([1, 0, 1], [1, 1, 1], fps=1.0)
                  + classify_errors([1, 0, 0, 0, 1], [1, 1, 1, 1, 1], fps=1.0))
        rows = error_report(events)
        bridged = rows[0]
        assert bridged.type is ErrorType.BRIDGED
        assert bridged.count == 2
        assert bridged.mean_s == pytest.approx(2.0)
        assert bridged.std_s == pytest.approx(1.0)

    def test_csv_shape(self):
        text = error_report_csv(error_report([]))
        lines = text.strip().split("\n")
        assert len(lines) == 8
        assert lines[0] == "Bridged,0,,"
        assert all(line.count(",") == 3 for line in lines)

    def test_text_table_has_all_types(self):
        table = format_error_report(error_report([]))
        for kind in ErrorType:
            assert kind.value in table


class TestSequenceStats:
    def test_two_signing_spans(self):
        labels = [1] * 50 + [0] * 10 + [1] * 150
        stats = sequence_stats(labels, fps=50.0)
        assert stats[1].count == 2
        assert stats[1].mean_s == pytest.approx(2.0)
        assert stats[1].std_s == pytest.approx(1.0)
        assert stats[0].count == 1

    def test_all_zeros(self):
        stats = sequence_stats([0, 0, 0], fps=50.0)
        assert stats[1].count == 0
        assert stats[1].mean_s is None

    def test_matches_naive_recomputation(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 2, 300)
        stats = sequence_stats(labels, fps=25.0)
        for value in (0, 1):
            lengths = []
            run = 0
            for i, lab in enumerate(labels):
                if lab == value:
                    run += 1
                if run and (lab != value or i == len(labels) - 1):
                    lengths.append(run / 25.0)
                    run = 0
            assert stats[value].count == len(lengths)
            assert stats[value].mean_s == pytest.approx(np.mean(lengths))
            assert stats[value].std_s == pytest.approx(np.std(lengths))
