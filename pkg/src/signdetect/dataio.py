"""Pose-export ingestion, gloss-derived labels, feature files, and synthetic corpora.

Supported pose export: one JSON file per sequence holding a header (``fps``,
optional ``width``/``height``/``id``) and a ``frames`` list.  Each frame has a
``people`` array; the first person carries flat ``x, y, confidence`` triples in
``pose_keypoints_2d`` (75 values), ``face_keypoints_2d`` (210),
``hand_left_keypoints_2d`` (63) and ``hand_right_keypoints_2d`` (63).  A frame
with no people yields 137 missing landmarks.  Only the first person is read:
the corpora this targets publish one camera stream per signer.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptFeatureFile, MissingFps, ParseError
from .pose_features import (
    BODY, FACE, LEFT_HAND, RIGHT_HAND,
    LEFT_ELBOW, LEFT_WRIST, NOSE, RIGHT_ELBOW, RIGHT_WRIST,
    POINT_COUNT, PointSubset, PoseSequence,
    extract_features, normalize_sequence,
)
from .training import LabeledSequence

FEATURE_MAGIC = b"SGNF"
FEATURE_FORMAT_VERSION = 1

_PART_KEYS = (
    ("pose_keypoints_2d", 25),
    ("face_keypoints_2d", 70),
    ("hand_left_keypoints_2d", 21),
    ("hand_right_keypoints_2d", 21),
)


@dataclass
class PoseFileHeader:
    fps: float
    width: int | None = None
    height: int | None = None
    source_id: str = ""

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")


@dataclass
class GlossSegments:
    """Annotated signing intervals of one signer, in milliseconds."""

    segments: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        for start, end in self.segments:
            if not start < end:
                raise ValueError(f"segment [{start}, {end}) is empty or reversed")

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


def load_pose_file(source, fps: float | None = None) -> PoseSequence:
    """Read a pose-export JSON file into a PoseSequence.

    ``fps`` overrides (or supplies, when absent) the header frame rate.
    """
    path = Path(source)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: malformed JSON: {e}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("frames"), list):
        raise ParseError(f"{path}: expected an object with a 'frames' list")
    if fps is None:
        fps = doc.get("fps")
        if fps is None:
            raise MissingFps(f"{path}: no fps in header and none supplied")
    try:
        header = PoseFileHeader(fps=float(fps), width=doc.get("width"),
                                height=doc.get("height"),
                                source_id=doc.get("id") or path.stem)
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad header: {e}") from None
    raw_frames = doc["frames"]
    if not raw_frames:
        raise ParseError(f"{path}: empty frames list")

    frames = np.zeros((len(raw_frames), POINT_COUNT, 3))
    for t, entry in enumerate(raw_frames):
        people = entry.get("people") if isinstance(entry, dict) else None
        if people is None:
            raise ParseError(f"{path}: frame {t}: missing 'people' array")
        if not people:
            continue  # nobody detected: every landmark stays missing
        person = people[0]
        parts = []
        for key, count in _PART_KEYS:
            values = person.get(key)
            if not isinstance(values, list) or len(values) != 3 * count:
                got = "missing" if values is None else f"{len(values)} values"
                raise ParseError(f"{path}: frame {t}: {key} must hold {3 * count} values, got {got}")
            parts.append(np.asarray(values, dtype=np.float64).reshape(count, 3))
        frame = np.concatenate(parts, axis=0)
        present = frame[:, 2] > 0
        if not np.isfinite(frame[present]).all():
            raise ParseError(f"{path}: frame {t}: non-finite coordinates on a present landmark")
        frames[t] = frame

    return PoseSequence(frames, header.fps, header.source_id)


def write_pose_file(seq: PoseSequence, destination, width: int | None = None,
                    height: int | None = None) -> None:
    """Write a PoseSequence in the supported pose-export JSON layout."""
    frames = []
    for frame in seq.frames:
        person = {}
        for (key, _), slots in zip(_PART_KEYS, (BODY, FACE, LEFT_HAND, RIGHT_HAND)):
            person[key] = [round(float(v), 6) for v in frame[slots].ravel()]
        frames.append({"people": [person]})
    doc = {"fps": seq.fps, "id": seq.source_id, "frames": frames}
    if width is not None:
        doc["width"] = width
    if height is not None:
        doc["height"] = height
    Path(destination).write_text(json.dumps(doc))


def load_gloss_csv(source) -> GlossSegments:
    """Read ``start_ms,end_ms`` rows into gloss segments."""
    segments = []
    for ln, line in enumerate(Path(source).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{source}: line {ln}: expected 'start_ms,end_ms'")
        try:
            segments.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{source}: line {ln}: non-numeric interval") from None
    return GlossSegments(segments)


def write_gloss_csv(segments: GlossSegments, destination) -> None:
    lines = [f"{start:g},{end:g}" for start, end in segments]
    Path(destination).write_text("\n".join(lines) + ("\n" if lines else ""))


def labels_from_gloss(segments: GlossSegments, frame_count: int, fps: float) -> np.ndarray:
    """Per-frame binary labels: 1 where the frame midpoint falls in any segment."""
    if not fps > 0:
        raise ValueError(f"fps must be positive, got {fps}")
    midpoints_ms = (np.arange(frame_count) + 0.5) * 1000.0 / fps
    labels = np.zeros(frame_count, dtype=np.uint8)
    for start, end in segments:
        labels |= ((midpoints_ms >= start) & (midpoints_ms < end)).astype(np.uint8)
    return labels


def save_features(features: np.ndarray, labels: np.ndarray, fps: float, destination) -> None:
    """Write a feature file (magic ``SGNF``): float32 features plus byte labels."""
    feats = np.asarray(features)
    labs = np.asarray(labels)
    if feats.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {feats.shape}")
    if labs.shape != (feats.shape[0],):
        raise ValueError(f"labels shape {labs.shape} does not match {feats.shape[0]} frames")
    if not np.isin(labs, (0, 1)).all():
        raise ValueError("labels must be binary")
    count, dim = feats.shape
    blob = bytearray()
    blob += struct.pack("<4sHIIf", FEATURE_MAGIC, FEATURE_FORMAT_VERSION, count, dim, float(fps))
    blob += np.ascontiguousarray(feats, dtype="<f4").tobytes()
    blob += labs.astype(np.uint8).tobytes()
    Path(destination).write_bytes(bytes(blob))


def load_features(source) -> LabeledSequence:
    """Read a feature file back; the source id is taken from the file name."""
    path = Path(source)
    data = path.read_bytes()
    header = struct.calcsize("<4sHIIf")
    if len(data) < header:
        raise CorruptFeatureFile(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, count, dim, fps = struct.unpack_from("<4sHIIf", data, 0)
    if magic != FEATURE_MAGIC:
        raise CorruptFeatureFile(f"{path}: bad magic bytes")
    if version != FEATURE_FORMAT_VERSION:
        raise CorruptFeatureFile(f"{path}: unsupported format version {version}")
    expected = header + 4 * count * dim + count
    if len(data) != expected:
        raise CorruptFeatureFile(f"{path}: expected {expected} bytes, got {len(data)}")
    feats = np.frombuffer(data, dtype="<f4", count=count * dim, offset=header)
    feats = feats.reshape(count, dim).copy()
    labels = np.frombuffer(data, dtype=np.uint8, count=count, offset=header + 4 * count * dim).copy()
    if count and not np.isin(labels, (0, 1)).all():
        raise CorruptFeatureFile(f"{path}: non-binary label byte")
    if not fps > 0:
        raise CorruptFeatureFile(f"{path}: non-positive fps {fps}")
    return LabeledSequence(feats, labels, float(fps), source_id=path.stem)


@dataclass
class SynthConfig:
    """Knobs of the synthetic conversation generator.

    Signing spans move the wrists, elbows and hand clusters along smooth
    random oscillations; not-signing spans are static apart from occasional
    face-touch reaches whose instantaneous speed overlaps the signing range,
    which is exactly what a single-frame classifier cannot disambiguate.
    """

    seed: int = 42
    sequences: int = 100
    fps: float = 50.0
    mean_duration_s: float = 20.0
    mean_signing_s: float = 5.1
    mean_not_signing_s: float = 4.9
    signing_amplitude: float = 0.6       # oscillation radius, shoulder widths
    ambient_rate_per_hour: float = 700.0  # face-touch events per hour of quiet
    ambient_amplitude: float = 0.5       # reach distance, shoulder widths
    noise_scale: float = 0.003           # landmark jitter sigma, shoulder widths

    def __post_init__(self):
        numeric = (self.fps, self.mean_duration_s, self.mean_signing_s, self.mean_not_signing_s,
                   self.signing_amplitude, self.ambient_rate_per_hour, self.ambient_amplitude,
                   self.noise_scale, self.sequences)
        if any(v < 0 for v in numeric):
            raise ValueError("synthetic config values must be non-negative")
        if not self.signing_amplitude > self.ambient_amplitude:
            raise ValueError("signing amplitude must exceed the ambient amplitude")


def _rest_pose() -> np.ndarray:
    """(137, 2) neutral upper-body pose in unit shoulder-width coordinates."""
    body = np.zeros((25, 2))
    body[NOSE] = (0.0, -0.45)
    body[1] = (0.0, 0.0)            # neck
    body[2] = (-0.5, 0.0)           # right shoulder
    body[RIGHT_ELBOW] = (-0.62, 0.45)
    body[RIGHT_WRIST] = (-0.55, 0.85)
    body[5] = (0.5, 0.0)            # left shoulder
    body[LEFT_ELBOW] = (0.62, 0.45)
    body[LEFT_WRIST] = (0.55, 0.85)
    body[8] = (0.0, 1.05)           # mid hip
    body[9] = (-0.22, 1.05)
    body[10] = (-0.24, 1.7)
    body[11] = (-0.25, 2.3)
    body[12] = (0.22, 1.05)
    body[13] = (0.24, 1.7)
    body[14] = (0.25, 2.3)
    body[15] = (-0.07, -0.5)        # eyes
    body[16] = (0.07, -0.5)
    body[17] = (-0.16, -0.47)       # ears
    body[18] = (0.16, -0.47)
    for i, idx in enumerate(range(19, 25)):  # feet
        body[idx] = (0.2 - 0.4 * (i >= 3), 2.4 + 0.03 * (i % 3))

    angles = np.linspace(0.0, 2 * np.pi, 70, endpoint=False)
    face = np.stack([0.16 * np.cos(angles), -0.45 + 0.2 * np.sin(angles)], axis=1)

    span = np.linspace(-0.06, 0.06, 21)
    left_hand = np.stack([body[LEFT_WRIST, 0] + span, body[LEFT_WRIST, 1] + 0.1 + 0.04 * np.cos(span * 40)], axis=1)
    right_hand = np.stack([body[RIGHT_WRIST, 0] + span, body[RIGHT_WRIST, 1] + 0.1 + 0.04 * np.cos(span * 40)], axis=1)
    return np.concatenate([body, face, left_hand, right_hand], axis=0)


_REST = _rest_pose()

_SIDES = (
    (LEFT_WRIST, LEFT_ELBOW, LEFT_HAND),
    (RIGHT_WRIST, RIGHT_ELBOW, RIGHT_HAND),
)


def _sample_spans(cfg: SynthConfig, rng: np.random.Generator, total: int) -> list[tuple[int, int, int]]:
    fps = cfg.fps
    spans = []
    label = int(rng.integers(0, 2))
    t = 0
    while t < total:
        mean = cfg.mean_signing_s if label else cfg.mean_not_signing_s
        length = rng.exponential(mean)
        frames = int(round(min(max(length, 1.0), 15.0) * fps))
        frames = min(frames, total - t)
        spans.append((t, t + frames, label))
        t += frames
        label ^= 1
    return spans


def _apply_oscillation(coords: np.ndarray, span: tuple[int, int, int], cfg: SynthConfig,
                       rng: np.random.Generator, width: float) -> None:
    start, end, _ = span
    fps = cfg.fps
    tt = np.arange(end - start) / fps
    total_s = (end - start) / fps
    ramp = 0.25
    envelope = np.clip(np.minimum(tt, total_s - tt) / ramp, 0.0, 1.0)
    for wrist, elbow, hand in _SIDES:
        fx, fy = rng.uniform(1.0, 2.5, 2)
        px, py = rng.uniform(0.0, 2 * np.pi, 2)
        amp = cfg.signing_amplitude * width * rng.uniform(0.7, 1.0)
        dx = amp * envelope * np.sin(2 * np.pi * fx * tt + px)
        dy = 0.7 * amp * envelope * np.sin(2 * np.pi * fy * tt + py)
        offset = np.stack([dx, dy], axis=1)
        coords[start:end, wrist] += offset
        coords[start:end, elbow] += 0.5 * offset
        coords[start:end, hand.start:hand.stop] += offset[:, None, :]


def _apply_face_touches(coords: np.ndarray, span: tuple[int, int, int], cfg: SynthConfig,
                        rng: np.random.Generator, width: float) -> None:
    start, end, _ = span
    fps = cfg.fps
    span_s = (end - start) / fps
    n_events = rng.poisson(cfg.ambient_rate_per_hour * span_s / 3600.0)
    touch_frames = int(round(0.4 * fps))
    for _ in range(n_events):
        if end - start <= touch_frames + 2:
            break
        at = int(rng.integers(start + 1, end - touch_frames - 1))
        wrist, elbow, hand = _SIDES[int(rng.integers(0, 2))]
        target = _REST[NOSE] * width + rng.normal(0.0, 0.04 * width, 2)
        reach = target - _REST[wrist] * width
        dist = float(np.hypot(*reach))
        limit = cfg.ambient_amplitude * width
        if dist > limit:
            reach *= limit / dist
        profile = np.sin(np.pi * np.arange(touch_frames) / (touch_frames - 1)) ** 2
        offset = reach[None, :] * profile[:, None]
        sl = slice(at, at + touch_frames)
        coords[sl, wrist] += offset
        coords[sl, elbow] += 0.5 * offset
        coords[sl, hand.start:hand.stop] += offset[:, None, :]


def _synth_sequence(cfg: SynthConfig, rng: np.random.Generator,
                    source_id: str) -> tuple[PoseSequence, GlossSegments]:
    fps = cfg.fps
    width = rng.uniform(0.7, 2.0)
    total = max(int(round(rng.uniform(0.75, 1.25) * cfg.mean_duration_s * fps)), int(2 * fps))
    spans = _sample_spans(cfg, rng, total)

    coords = np.tile(_REST * width, (total, 1, 1))
    for span in spans:
        if span[2] == 1:
            _apply_oscillation(coords, span, cfg, rng, width)
        else:
            _apply_face_touches(coords, span, cfg, rng, width)
    if cfg.noise_scale > 0:
        coords += rng.normal(0.0, cfg.noise_scale * width, coords.shape)

    frames = np.concatenate([coords, np.ones((total, POINT_COUNT, 1))], axis=2)
    segments = GlossSegments([(s / fps * 1000.0, e / fps * 1000.0) for s, e, lab in spans if lab == 1])
    return PoseSequence(frames, fps, source_id), segments


def synth_corpus(cfg: SynthConfig) -> list[tuple[PoseSequence, GlossSegments]]:
    """Deterministic synthetic conversation corpus; one video per sequence."""
    rng = np.random.default_rng(cfg.seed)
    return [_synth_sequence(cfg, rng, f"synth{k:04d}#a") for k in range(cfg.sequences)]


def synth_labeled_corpus(cfg: SynthConfig, subset: PointSubset) -> list[LabeledSequence]:
    """Synthetic corpus run through the offline pipeline: normalize, extract, label."""
    out = []
    for seq, segments in synth_corpus(cfg):
        normalized = normalize_sequence(seq)
        feats = extract_features(normalized, subset)
        labels = labels_from_gloss(segments, len(seq), seq.fps)
        out.append(LabeledSequence(feats, labels, seq.fps, source_id=seq.source_id))
    return out


def label_fraction(corpus: list[tuple[PoseSequence, GlossSegments]]) -> float:
    """Fraction of signing frames, recomputed through ``labels_from_gloss``."""
    signing = 0
    total = 0
    for seq, segments in corpus:
        labels = labels_from_gloss(segments, len(seq), seq.fps)
        signing += int(labels.sum())
        total += len(labels)
    return signing / total if total else 0.0
