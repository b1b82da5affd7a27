"""Frame accuracy, span statistics, and the span-level error taxonomy.

Mismatch frames between a prediction and the gold labels are grouped into
maximal runs, split wherever they cross a gold-span boundary, and each
resulting segment is classified into one of eight categories by the gold
value inside it and which ends of its enclosing gold span it touches.  A
span boundary at the edge of the sequence does not count as "touched": the
bridged and skipped categories need real neighbouring spans on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyInput, LengthMismatch


class ErrorType(Enum):
    """The eight span-level error categories."""

    BRIDGED = "Bridged"
    SIGNING_DETECTED_INCORRECTLY = "Signing Detected Incorrectly"
    SIGNING_OVERFLOW = "Signing Overflow"
    STARTED_PRE_SIGNING = "Started Pre-Signing"
    SKIPPED = "Skipped"
    SIGNING_UNDETECTED_INCORRECTLY = "Signing Undetected Incorrectly"
    STARTED_POST_SIGNING = "Started Post-Signing"
    SIGNING_UNDERFLOW = "Signing Underflow"


# Complementing gold and pred swaps the false-signing and false-silent types.
SYMMETRIC_TYPE = {
    ErrorType.BRIDGED: ErrorType.SKIPPED,
    ErrorType.SKIPPED: ErrorType.BRIDGED,
    ErrorType.SIGNING_DETECTED_INCORRECTLY: ErrorType.SIGNING_UNDETECTED_INCORRECTLY,
    ErrorType.SIGNING_UNDETECTED_INCORRECTLY: ErrorType.SIGNING_DETECTED_INCORRECTLY,
    ErrorType.SIGNING_OVERFLOW: ErrorType.STARTED_POST_SIGNING,
    ErrorType.STARTED_POST_SIGNING: ErrorType.SIGNING_OVERFLOW,
    ErrorType.STARTED_PRE_SIGNING: ErrorType.SIGNING_UNDERFLOW,
    ErrorType.SIGNING_UNDERFLOW: ErrorType.STARTED_PRE_SIGNING,
}


@dataclass(frozen=True)
class Span:
    """Half-open frame interval [start, end) of a constant label."""

    start: int
    end: int
    label: int

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class ErrorEvent:
    """One classified mismatch segment; the span's label is the predicted value."""

    type: ErrorType
    span: Span
    duration_s: float


@dataclass(frozen=True)
class ErrorReportRow:
    type: ErrorType
    count: int
    mean_s: float | None
    std_s: float | None


@dataclass(frozen=True)
class SpanStats:
    count: int
    mean_s: float | None
    std_s: float | None


def _as_labels(values) -> list[int]:
    if isinstance(values, np.ndarray):
        flat = values.ravel()
        if flat.size and not np.isin(flat, (0, 1)).all():
            raise ValueError("labels must be binary")
        return flat.astype(int).tolist()
    out = [int(v) for v in values]
    for v in out:
        if v not in (0, 1):
            raise ValueError(f"labels must be binary, got {v}")
    return out


def frame_accuracy(pred, gold) -> float:
    """Fraction of frames where prediction and gold agree."""
    p = _as_labels(pred)
    g = _as_labels(gold)
    if len(p) != len(g):
        raise LengthMismatch(f"{len(p)} predictions vs {len(g)} gold labels")
    if not p:
        raise EmptyInput("accuracy of zero frames is undefined")
    return sum(a == b for a, b in zip(p, g)) / len(p)


def _runs(seq: list[int]) -> list[tuple[int, int, int]]:
    """(start, end, label) runs of an already-validated label list."""
    runs = []
    start = 0
    for t in range(1, len(seq) + 1):
        if t == len(seq) or seq[t] != seq[start]:
            runs.append((start, t, seq[start]))
            start = t
    return runs


def extract_spans(labels) -> list[Span]:
    """Maximal runs of equal labels, in order, covering the whole sequence."""
    return [Span(*run) for run in _runs(_as_labels(labels))]


def _classify_segment(gold_start: int, gold_end: int, gold_label: int,
                      start: int, end: int, total: int, fps: float) -> ErrorEvent:
    on_left = start == gold_start and gold_start > 0
    on_right = end == gold_end and gold_end < total
    if gold_label == 0:
        if on_left and on_right:
            kind = ErrorType.BRIDGED
        elif on_left:
            kind = ErrorType.SIGNING_OVERFLOW
        elif on_right:
            kind = ErrorType.STARTED_PRE_SIGNING
        else:
            kind = ErrorType.SIGNING_DETECTED_INCORRECTLY
    else:
        if on_left and on_right:
            kind = ErrorType.SKIPPED
        elif on_left:
            kind = ErrorType.STARTED_POST_SIGNING
        elif on_right:
            kind = ErrorType.SIGNING_UNDERFLOW
        else:
            kind = ErrorType.SIGNING_UNDETECTED_INCORRECTLY
    return ErrorEvent(kind, Span(start, end, 1 - gold_label), (end - start) / fps)


def classify_errors(gold, pred, fps: float) -> list[ErrorEvent]:
    """Partition every mismatch frame into classified error events.

    Events never cross gold-span boundaries; together they cover each
    mismatch frame exactly once.
    """
    g = _as_labels(gold)
    p = _as_labels(pred)
    if len(g) != len(p):
        raise LengthMismatch(f"{len(g)} gold labels vs {len(p)} predictions")
    if not fps > 0:
        raise ValueError(f"fps must be positive, got {fps}")
    total = len(g)
    events = []
    for gold_start, gold_end, gold_label in _runs(g):
        t = gold_start
        while t < gold_end:
            if p[t] == gold_label:
                t += 1
                continue
            run_end = t + 1
            while run_end < gold_end and p[run_end] != gold_label:
                run_end += 1
            events.append(_classify_segment(gold_start, gold_end, gold_label, t, run_end, total, fps))
            t = run_end
    return events


def error_report(events: list[ErrorEvent]) -> list[ErrorReportRow]:
    """Count, mean duration, and population std per error type, in taxonomy order."""
    by_type: dict[ErrorType, list[float]] = {t: [] for t in ErrorType}
    for ev in events:
        by_type[ev.type].append(ev.duration_s)
    rows = []
    for kind in ErrorType:
        durations = by_type[kind]
        if not durations:
            rows.append(ErrorReportRow(kind, 0, None, None))
            continue
        mean = sum(durations) / len(durations)
        var = sum((d - mean) ** 2 for d in durations) / len(durations)
        rows.append(ErrorReportRow(kind, len(durations), mean, math.sqrt(var)))
    return rows


def error_report_csv(rows: list[ErrorReportRow]) -> str:
    """Machine-readable report: one ``type,count,mean_s,std_s`` line per type."""
    lines = []
    for row in rows:
        mean = "" if row.mean_s is None else repr(row.mean_s)
        std = "" if row.std_s is None else repr(row.std_s)
        lines.append(f"{row.type.value},{row.count},{mean},{std}")
    return "\n".join(lines) + "\n"


def format_error_report(rows: list[ErrorReportRow]) -> str:
    """Aligned text table of the error taxonomy."""
    width = max(len(row.type.value) for row in rows)
    lines = [f"{'error type':<{width}}  {'count':>7}  {'mean s':>8}  {'std s':>8}"]
    for row in rows:
        mean = "-" if row.mean_s is None else f"{row.mean_s:.2f}"
        std = "-" if row.std_s is None else f"{row.std_s:.2f}"
        lines.append(f"{row.type.value:<{width}}  {row.count:>7}  {mean:>8}  {std:>8}")
    return "\n".join(lines)


def sequence_stats(labels, fps: float) -> dict[int, SpanStats]:
    """Span count, mean length, and population std in seconds, per label value."""
    if not fps > 0:
        raise ValueError(f"fps must be positive, got {fps}")
    seq = _as_labels(labels)
    if not seq:
        raise EmptyInput("statistics of zero frames are undefined")
    durations: dict[int, list[float]] = {0: [], 1: []}
    for start, end, label in _runs(seq):
        durations[label].append((end - start) / fps)
    out = {}
    for label, values in durations.items():
        if not values:
            out[label] = SpanStats(0, None, None)
            continue
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out[label] = SpanStats(len(values), mean, math.sqrt(var))
    return out
