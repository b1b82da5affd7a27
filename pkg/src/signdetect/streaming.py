"""The real-time per-frame engine: normalization, incremental flow, one LSTM step.

In trailing-window mode the engine rescales each incoming frame by the mean
of the last 50 observed shoulder distances (scale 1 until the first
observation).  In per-sequence mode the engine applies no scaling and expects
the stream to be normalized already, which is what an offline replay of a
normalized sequence provides; that mode reproduces the offline forward pass
frame for frame.

Stream line protocol (the CLI speaks this on stdin/stdout):
input  ``{"t": <frame index>, "points": [[x, y, confidence] x 137]}``
output ``{"t": <frame index>, "p": <probability>, "signing": 0|1, "us": <latency>}``
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ParseError
from .models import LstmClassifier, LstmState, lstm_step, predict
from .pose_features import (
    POINT_COUNT, NormalizationMode, PointSubset,
    flow_step, select_points, shoulder_distance,
)

TRAILING_WINDOW_FRAMES = 50


@dataclass
class EngineConfig:
    """Everything a session needs: model, point subset, frame rate, scaling mode."""

    model: LstmClassifier
    subset: PointSubset
    fps: float
    norm_mode: NormalizationMode = NormalizationMode.TRAILING_WINDOW
    window: int = TRAILING_WINDOW_FRAMES

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.window < 1:
            raise ValueError(f"window must be positive, got {self.window}")
        if self.model.input_dim != self.subset.dim:
            raise DimensionMismatch(f"model expects {self.model.input_dim} points, "
                                    f"subset {self.subset.value} provides {self.subset.dim}")

    @classmethod
    def for_model(cls, model: LstmClassifier, fps: float,
                  window: int = TRAILING_WINDOW_FRAMES) -> "EngineConfig":
        """Config matching the subset and normalization recorded in the model."""
        return cls(model, model.subset, fps, model.norm_mode, window)


@dataclass
class StepOutput:
    probability: float
    label: int
    latency_us: float


class EngineSession:
    """Single-caller streaming session; memory use is independent of stream length."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self._state = LstmState.zeros(config.model.hidden_dim)
        self._prev_points: np.ndarray | None = None
        self._shoulder_ring: deque[float] = deque(maxlen=config.window)
        self._frame_count = 0
        self._last_logits: np.ndarray | None = None

    @property
    def frame_count(self) -> int:
        return self._frame_count

    @property
    def last_logits(self) -> np.ndarray | None:
        """Raw logits of the most recent step; None before the first step."""
        return self._last_logits

    @property
    def current_scale(self) -> float:
        """Coordinate scale implied by the shoulder observations so far."""
        if self.config.norm_mode is not NormalizationMode.TRAILING_WINDOW or not self._shoulder_ring:
            return 1.0
        mean = sum(self._shoulder_ring) / len(self._shoulder_ring)
        return 1.0 / mean if mean > 0 else 1.0

    def reset(self) -> "EngineSession":
        """Return the session to the state of a freshly created one."""
        self._state = LstmState.zeros(self.config.model.hidden_dim)
        self._prev_points = None
        self._shoulder_ring.clear()
        self._frame_count = 0
        self._last_logits = None
        return self

    def step(self, frame: np.ndarray) -> StepOutput:
        """Classify one frame; exactly one LSTM step per call."""
        started = time.perf_counter_ns()
        frame = np.array(frame, dtype=np.float64)
        if frame.shape != (POINT_COUNT, 3):
            raise DimensionMismatch(f"expected a ({POINT_COUNT}, 3) frame, got {frame.shape}")

        if self.config.norm_mode is NormalizationMode.TRAILING_WINDOW:
            dist = shoulder_distance(frame)
            if dist is not None:
                self._shoulder_ring.append(dist)
            frame[:, :2] *= self.current_scale

        points = select_points(frame, self.config.subset)
        if self._prev_points is None:
            flow = np.zeros(self.config.subset.dim)
        else:
            flow = flow_step(self._prev_points, points, self.config.fps)
        self._prev_points = points

        self._state, logits = lstm_step(self.config.model, self._state, flow)
        self._last_logits = logits
        label, probability = predict(logits)
        self._frame_count += 1
        latency_us = (time.perf_counter_ns() - started) / 1000.0
        return StepOutput(probability, label, latency_us)


@dataclass(frozen=True)
class LatencyStats:
    mean_us: float
    p50_us: float
    p99_us: float
    max_us: float

    @property
    def frames_per_second(self) -> float:
        return 1e6 / self.mean_us


@dataclass(frozen=True)
class BenchReport:
    per_rep: list[LatencyStats]
    pooled: LatencyStats
    frames: int
    reps: int


def _stats(samples: np.ndarray) -> LatencyStats:
    return LatencyStats(
        mean_us=float(samples.mean()),
        p50_us=float(np.percentile(samples, 50)),
        p99_us=float(np.percentile(samples, 99)),
        max_us=float(samples.max()),
    )


def bench(model: LstmClassifier, subset: PointSubset, frames: int = 10000,
          reps: int = 5, fps: float = 50.0, seed: int = 42) -> BenchReport:
    """Measure step() wall time per frame on synthetic random frames.

    One warm-up pass runs first and is discarded; every repetition replays the
    same frames through a fresh session on a single execution lane.
    """
    if frames < 1000:
        raise ValueError(f"need at least 1000 frames for stable statistics, got {frames}")
    if reps < 3:
        raise ValueError(f"need at least 3 repetitions, got {reps}")
    rng = np.random.default_rng(seed)
    stream = rng.normal(0.0, 0.5, (frames, POINT_COUNT, 3))
    stream[:, :, 2] = 1.0
    config = EngineConfig(model, subset, fps, NormalizationMode.TRAILING_WINDOW)

    warmup = EngineSession(config)
    for frame in stream[:1000]:
        warmup.step(frame)

    per_rep = []
    pooled = []
    for _ in range(reps):
        session = EngineSession(config)
        latencies = np.empty(frames)
        for i in range(frames):
            latencies[i] = session.step(stream[i]).latency_us
        per_rep.append(_stats(latencies))
        pooled.append(latencies)
    return BenchReport(per_rep, _stats(np.concatenate(pooled)), frames, reps)


def format_bench_report(report: BenchReport) -> str:
    """Aligned text followed by machine-readable CSV rows."""
    lines = [f"latency over {report.frames} frames x {report.reps} repetitions (microseconds)"]
    header = f"{'rep':>6}  {'mean':>9}  {'p50':>9}  {'p99':>9}  {'max':>9}  {'frames/s':>10}"
    lines.append(header)
    rows = list(enumerate(report.per_rep, start=1)) + [("pooled", report.pooled)]
    for name, s in rows:
        lines.append(f"{name:>6}  {s.mean_us:>9.1f}  {s.p50_us:>9.1f}  {s.p99_us:>9.1f}  "
                     f"{s.max_us:>9.1f}  {s.frames_per_second:>10.0f}")
    lines.append("")
    lines.append("rep,mean_us,p50_us,p99_us,max_us,frames_per_s")
    for name, s in rows:
        lines.append(f"{name},{s.mean_us:.3f},{s.p50_us:.3f},{s.p99_us:.3f},"
                     f"{s.max_us:.3f},{s.frames_per_second:.1f}")
    return "\n".join(lines)


def decode_frame_line(line: str) -> tuple[int, np.ndarray]:
    """Parse one input line of the stream protocol into (frame index, frame)."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad stream line: {e}") from None
    if not isinstance(obj, dict) or "t" not in obj or "points" not in obj:
        raise ParseError("stream line must be an object with 't' and 'points'")
    points = np.asarray(obj["points"], dtype=np.float64)
    if points.shape != (POINT_COUNT, 3):
        raise ParseError(f"stream line {obj.get('t')}: points must be {POINT_COUNT} [x, y, c] "
                         f"triples, got shape {points.shape}")
    return int(obj["t"]), points


def encode_frame_line(t: int, frame: np.ndarray) -> str:
    points = [[float(x), float(y), float(c)] for x, y, c in np.asarray(frame, dtype=np.float64)]
    return json.dumps({"t": int(t), "points": points})


def encode_step_line(t: int, out: StepOutput) -> str:
    return json.dumps({"t": int(t), "p": out.probability, "signing": out.label, "us": out.latency_us})
