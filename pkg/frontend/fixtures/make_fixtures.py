"""Regenerate the browser-engine fixtures.

Trains a small pose-body model on a seeded synthetic corpus, stamps it for
trailing-window normalization (the live deployment mode), and writes:

  model.sgns      the trained model in the binary model format
  frames.jsonl    a raw synthetic clip in the stream line protocol, with some
                  landmarks knocked out to exercise the missing-point rule
  expected.jsonl  the command-line ``stream`` output on exactly that input
  static.jsonl    a motionless clip (jitter only) for the warm-up trend check

Run from this directory:  python3 make_fixtures.py   (takes about a minute)
"""

import dataclasses
import subprocess
import sys
from pathlib import Path

import numpy as np

from signdetect.dataio import SynthConfig, synth_corpus, synth_labeled_corpus
from signdetect.models import save
from signdetect.pose_features import NormalizationMode, PointSubset
from signdetect.streaming import encode_frame_line
from signdetect.training import TrainConfig, split_corpus, train

HERE = Path(__file__).parent
FPS = 50.0


def write_jsonl(path: Path, frames: np.ndarray) -> str:
    lines = "\n".join(encode_frame_line(t, f) for t, f in enumerate(frames)) + "\n"
    path.write_text(lines)
    return lines


def main():
    corpus = synth_labeled_corpus(SynthConfig(seed=2024, sequences=24), PointSubset.POSE_BODY)
    train_set, dev_set, _ = split_corpus(corpus)
    model, history = train(train_set, TrainConfig(epochs=10, seed=2024), dev=dev_set)
    print(f"trained fixture model: dev accuracy {max(h.dev_accuracy for h in history):.4f}")
    model = dataclasses.replace(model, norm_mode=NormalizationMode.TRAILING_WINDOW)
    save(model, HERE / "model.sgns")

    clip, _ = synth_corpus(SynthConfig(seed=31, sequences=1, mean_duration_s=5.0))[0]
    frames = clip.frames[:250].copy()
    rng = np.random.default_rng(7)
    for _ in range(30):  # dropped detections, including occasional shoulders
        t = int(rng.integers(1, len(frames)))
        p = int(rng.integers(0, 137))
        frames[t, p, 2] = 0.0
    frames[40:43, :, 2] = 0.0  # a fully missed person
    lines = write_jsonl(HERE / "frames.jsonl", frames)

    result = subprocess.run(
        [sys.executable, "-m", "signdetect.cli", "stream",
         "--model", str(HERE / "model.sgns"), "--fps", str(FPS)],
        input=lines, capture_output=True, text=True, check=True)
    (HERE / "expected.jsonl").write_text(result.stdout)

    # motionless person: one rest frame tiled, with landmark jitter only
    rest = clip.frames[0]
    static_frames = np.tile(rest, (200, 1, 1))
    static_frames[:, :, :2] += np.random.default_rng(62).normal(0.0, 0.003, (200, 137, 2))
    write_jsonl(HERE / "static.jsonl", static_frames)

    print(f"wrote model.sgns, frames.jsonl ({len(frames)} frames), expected.jsonl, "
          f"static.jsonl ({len(static_frames)} frames)")


if __name__ == "__main__":
    main()
