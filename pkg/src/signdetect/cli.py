"""Command-line entry point wiring the library into reproducible pipelines.

Exit codes: 0 success, 2 usage or data error, 1 internal error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import dataio, evaluation, models, streaming, training
from .errors import SignDetectError
from .pose_features import (
    PointSubset, extract_features, normalize_sequence, subset_point_names,
)

_SUBSET_NAMES = [s.value for s in PointSubset]


def _add_subset_flag(parser, default="pose-body"):
    parser.add_argument("--subset", choices=_SUBSET_NAMES, default=default,
                        help="landmark subset feeding the model")


def _load_corpus(data_dir: str) -> list[training.LabeledSequence]:
    paths = sorted(Path(data_dir).glob("*.sgnf"))
    return [dataio.load_features(p) for p in paths]


def _cmd_extract(args) -> int:
    seq = dataio.load_pose_file(args.poses, fps=args.fps)
    subset = PointSubset.from_name(args.subset)
    features = extract_features(normalize_sequence(seq), subset)
    if args.labels:
        labels = dataio.labels_from_gloss(dataio.load_gloss_csv(args.labels), len(seq), seq.fps)
    else:
        labels = np.zeros(len(seq), dtype=np.uint8)
    dataio.save_features(features, labels, seq.fps, args.out)
    print(f"wrote {args.out}: {features.shape[0]} frames x {features.shape[1]} features")
    return 0


def _cmd_train(args) -> int:
    corpus = _load_corpus(args.data)
    train_set, dev_set, test_set = training.split_corpus(corpus)
    subset = PointSubset.from_name(args.subset)
    if corpus and corpus[0].features.shape[1] != subset.dim:
        raise SignDetectError(f"data has {corpus[0].features.shape[1]} feature columns but "
                              f"subset {subset.value} expects {subset.dim}")
    print(f"split: {len(train_set)} train / {len(dev_set)} dev / {len(test_set)} test sequences")
    if args.model == "lstm":
        cfg = training.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                                   chunk_len=args.chunk, patience=args.patience,
                                   seed=args.seed, subset=subset)
        model, history = training.train(train_set, cfg, dev=dev_set)
        for record in history:
            print(f"epoch {record.epoch:3d}  loss {record.train_loss:.6f}  "
                  f"dev_acc {record.dev_accuracy:.4f}")
    else:
        model = training.train_linear(train_set, args.window, seed=args.seed)
        acc = _accuracy(model, dev_set)
        print(f"linear-{args.window} trained; dev_acc {acc:.4f}")
    models.save(model, args.out)
    print(f"wrote {args.out}: {models.param_count(model)} parameters")
    return 0


def _predict_sequence(model, features: np.ndarray) -> np.ndarray:
    if isinstance(model, models.LstmClassifier):
        logits = models.forward_sequence(model, features)
        return (logits[:, 1] > logits[:, 0]).astype(np.uint8)
    return (models.linear_forward(model, features) > 0).astype(np.uint8)


def _accuracy(model, corpus) -> float:
    hits = 0
    total = 0
    for seq in corpus:
        pred = _predict_sequence(model, seq.features)
        hits += int((pred == seq.labels).sum())
        total += len(seq)
    return hits / total if total else float("nan")


def _cmd_eval(args) -> int:
    model = models.load(args.model)
    corpus = _load_corpus(args.data)
    split_sets = dict(zip(("train", "dev", "test"), training.split_corpus(corpus)))
    split_sets["all"] = corpus
    subset = split_sets[args.split]
    if not subset:
        raise SignDetectError(f"split {args.split!r} holds no sequences")

    events = []
    hits = 0
    total = 0
    gold_all = []
    fps = subset[0].fps
    for seq in subset:
        pred = _predict_sequence(model, seq.features)
        hits += int((pred == seq.labels).sum())
        total += len(seq)
        events.extend(evaluation.classify_errors(seq.labels, pred, seq.fps))
        gold_all.append(seq.labels)

    accuracy = hits / total
    print(f"frame accuracy on {args.split}: {accuracy:.4f} ({total} frames, {len(subset)} sequences)")
    stats = _pooled_sequence_stats(gold_all, fps)
    for label, name in ((1, "signing"), (0, "not-signing")):
        s = stats[label]
        if s.count:
            print(f"gold {name} spans: {s.count}, mean {s.mean_s:.2f} s, std {s.std_s:.2f} s")
        else:
            print(f"gold {name} spans: 0")
    rows = evaluation.error_report(events)
    print(evaluation.format_error_report(rows))
    Path(args.report).write_text(evaluation.error_report_csv(rows))
    print(f"wrote {args.report}")
    return 0


def _pooled_sequence_stats(label_arrays, fps):
    durations = {0: [], 1: []}
    for labels in label_arrays:
        for span in evaluation.extract_spans(labels):
            durations[span.label].append(len(span) / fps)
    out = {}
    for label, values in durations.items():
        if not values:
            out[label] = evaluation.SpanStats(0, None, None)
            continue
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out[label] = evaluation.SpanStats(len(values), mean, math.sqrt(var))
    return out


def _cmd_bench(args) -> int:
    model = models.load(args.model)
    if not isinstance(model, models.LstmClassifier):
        raise SignDetectError("bench drives the streaming engine, which runs LSTM models only")
    report = streaming.bench(model, model.subset, frames=args.frames, reps=args.reps)
    print(streaming.format_bench_report(report))
    return 0


def _cmd_stream(args) -> int:
    model = models.load(args.model)
    if not isinstance(model, models.LstmClassifier):
        raise SignDetectError("stream drives the streaming engine, which runs LSTM models only")
    session = streaming.EngineSession(streaming.EngineConfig.for_model(model, args.fps))
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        t, frame = streaming.decode_frame_line(line)
        out = session.step(frame)
        print(streaming.encode_step_line(t, out), flush=True)
    return 0


def _cmd_synth(args) -> int:
    cfg = dataio.SynthConfig(seed=args.seed, sequences=args.sequences)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "poses":
        for seq, segments in dataio.synth_corpus(cfg):
            dataio.write_pose_file(seq, out_dir / f"{seq.source_id}.pose.json")
            dataio.write_gloss_csv(segments, out_dir / f"{seq.source_id}.gloss.csv")
        print(f"wrote {cfg.sequences} pose/gloss pairs to {out_dir}")
        return 0
    subset = PointSubset.from_name(args.subset)
    corpus = dataio.synth_labeled_corpus(cfg, subset)
    for seq in corpus:
        dataio.save_features(seq.features, seq.labels, seq.fps, out_dir / f"{seq.source_id}.sgnf")
    signing = sum(int(s.labels.sum()) for s in corpus)
    frames = sum(len(s) for s in corpus)
    print(f"wrote {len(corpus)} feature files to {out_dir} "
          f"({frames} frames, {signing / frames:.1%} signing)")
    return 0


def _cmd_inspect(args) -> int:
    model = models.load(args.model)
    names = subset_point_names(model.subset)
    if isinstance(model, models.LinearClassifier):
        weights = np.abs(model.weights.astype(np.float64))
        values = weights[0] if model.window == 1 else np.sqrt((weights ** 2).sum(axis=0))
        print(f"linear-{model.window}: per-landmark coefficient magnitude")
    else:
        w = model.w_x.astype(np.float64)
        values = np.sqrt((w * w).sum(axis=0))
        print(f"lstm ({model.subset.value}): input-weight column norms")
    for idx, (name, value) in enumerate(zip(names, values)):
        print(f"{idx},{name},{value:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signdetect",
                                     description="Per-frame sign-language detection toolchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="pose JSON (+ gloss CSV) -> feature file")
    p.add_argument("--poses", required=True, help="pose-export JSON file")
    p.add_argument("--fps", type=float, default=None, help="frame rate when absent from the header")
    _add_subset_flag(p)
    p.add_argument("--labels", default=None, help="gloss segment CSV (start_ms,end_ms); default all 0")
    p.add_argument("--out", required=True, help="output .sgnf path")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="train a classifier on a directory of .sgnf files")
    p.add_argument("--data", required=True, help="directory of .sgnf feature files")
    p.add_argument("--model", choices=("lstm", "linear"), default="lstm")
    p.add_argument("--window", type=int, choices=(1, 25, 50), default=1,
                   help="context length of the linear baseline")
    _add_subset_flag(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--chunk", type=int, default=500)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="frame accuracy, span stats, and the error taxonomy")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test", "all"), default="test")
    p.add_argument("--report", required=True, help="output CSV report path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="per-frame latency of the streaming engine")
    p.add_argument("--model", required=True)
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("stream", help="classify a frame stream on stdin (line protocol)")
    p.add_argument("--model", required=True)
    p.add_argument("--fps", type=float, default=50.0)
    p.set_defaults(func=_cmd_stream)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--sequences", type=int, default=100)
    p.add_argument("--format", choices=("sgnf", "poses"), default="sgnf")
    _add_subset_flag(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("inspect", help="dump per-landmark weight magnitudes")
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed the pipe (e.g. stream | head); leave quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (SignDetectError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
