import io
import json

import numpy as np
import pytest

from signdetect import models
from signdetect.cli import main
from signdetect.dataio import SynthConfig, load_features, synth_corpus, synth_labeled_corpus
from signdetect.pose_features import PointSubset
from signdetect.streaming import encode_frame_line
from signdetect.training import split_corpus


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    """Small shared corpus: features plus one raw pose/gloss pair."""
    root = tmp_path_factory.mktemp("corpus")
    data = root / "sgnf"
    data.mkdir()
    code = main(["synth", "--seed", "9", "--sequences", "12", "--out", str(data)])
    assert code == 0
    poses = root / "poses"
    poses.mkdir()
    code = main(["synth", "--seed", "9", "--sequences", "1", "--format", "poses",
                 "--out", str(poses)])
    assert code == 0
    return root


@pytest.fixture(scope="module")
def lstm_model(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "lstm.sgns"
    code = main(["train", "--data", str(synth_dir / "sgnf"), "--model", "lstm",
                 "--seed", "3", "--epochs", "4", "--out", str(out)])
    assert code == 0
    return out


class TestSynthAndExtract:
    def test_synth_writes_sgnf(self, synth_dir):
        files = sorted((synth_dir / "sgnf").glob("*.sgnf"))
        assert len(files) == 12
        seq = load_features(files[0])
        assert seq.features.shape[1] == 25

    def test_extract_matches_synth_features(self, synth_dir, tmp_path):
        pose_file = next((synth_dir / "poses").glob("*.pose.json"))
        gloss_file = next((synth_dir / "poses").glob("*.gloss.csv"))
        out = tmp_path / "x.sgnf"
        code = main(["extract", "--poses", str(pose_file), "--labels", str(gloss_file),
                     "--subset", "pose-body", "--out", str(out)])
        assert code == 0
        got = load_features(out)
        want = synth_labeled_corpus(SynthConfig(seed=9, sequences=1), PointSubset.POSE_BODY)[0]
        np.testing.assert_array_equal(got.labels, want.labels)
        # pose JSON stores rounded coordinates, so features agree loosely only
        np.testing.assert_allclose(got.features, want.features, atol=0.05)

    def test_extract_subset_dimension(self, synth_dir, tmp_path):
        pose_file = next((synth_dir / "poses").glob("*.pose.json"))
        out = tmp_path / "bbox.sgnf"
        assert main(["extract", "--poses", str(pose_file), "--subset", "bbox",
                     "--out", str(out)]) == 0
        assert load_features(out).features.shape[1] == 8

    def test_extract_missing_fps_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "nofps.pose.json"
        bad.write_text(json.dumps({"frames": [{"people": []}]}))
        code = main(["extract", "--poses", str(bad), "--out", str(tmp_path / "o.sgnf")])
        assert code == 2
        assert "fps" in capsys.readouterr().err.lower()

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["synth", "--bogus", "1", "--out", "x"])
        assert err.value.code == 2


class TestTrain:
    def test_linear_window_50_has_1250_params(self, synth_dir, tmp_path):
        out = tmp_path / "lin50.sgns"
        code = main(["train", "--data", str(synth_dir / "sgnf"), "--model", "linear",
                     "--window", "50", "--out", str(out)])
        assert code == 0
        model = models.load(out)
        assert models.param_count(model) == 1250

    def test_same_seed_identical_bytes(self, synth_dir, tmp_path):
        a, b = tmp_path / "a.sgns", tmp_path / "b.sgns"
        args = ["train", "--data", str(synth_dir / "sgnf"), "--model", "lstm",
                "--seed", "5", "--epochs", "2"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_prints_history(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "m.sgns"
        assert main(["train", "--data", str(synth_dir / "sgnf"), "--model", "lstm",
                     "--epochs", "2", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "epoch   1" in text and "dev_acc" in text

    def test_empty_data_dir_exits_2(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main(["train", "--data", str(empty), "--model", "lstm",
                     "--out", str(tmp_path / "m.sgns")]) == 2


class TestEval:
    def test_report_has_8_rows(self, synth_dir, lstm_model, tmp_path, capsys):
        report = tmp_path / "report.csv"
        code = main(["eval", "--model", str(lstm_model), "--data", str(synth_dir / "sgnf"),
                     "--report", str(report)])
        assert code == 0
        rows = [r for r in report.read_text().strip().split("\n") if r]
        assert len(rows) == 8
        assert all(r.count(",") == 3 for r in rows)
        out = capsys.readouterr().out
        assert "frame accuracy" in out

    def test_accuracy_matches_recomputation(self, synth_dir, lstm_model, tmp_path, capsys):
        report = tmp_path / "report.csv"
        assert main(["eval", "--model", str(lstm_model), "--data", str(synth_dir / "sgnf"),
                     "--split", "test", "--report", str(report)]) == 0
        printed = capsys.readouterr().out
        shown = float(printed.split("frame accuracy on test:")[1].split()[0])

        corpus = [load_features(p) for p in sorted((synth_dir / "sgnf").glob("*.sgnf"))]
        _, _, test_set = split_corpus(corpus)
        model = models.load(lstm_model)
        hits = total = 0
        for seq in test_set:
            logits = models.forward_sequence(model, seq.features)
            pred = (logits[:, 1] > logits[:, 0]).astype(np.uint8)
            hits += int((pred == seq.labels).sum())
            total += len(seq)
        assert shown == pytest.approx(hits / total, abs=5e-5)


class TestStream:
    def test_stream_reproduces_offline_labels(self, synth_dir, lstm_model, capsys, monkeypatch):
        corpus = [load_features(p) for p in sorted((synth_dir / "sgnf").glob("*.sgnf"))]
        model = models.load(lstm_model)
        seq = corpus[0]
        logits = models.forward_sequence(model, seq.features)
        want = (logits[:, 1] > logits[:, 0]).astype(int)

        # replay the matching normalized pose stream through the CLI
        from signdetect.dataio import SynthConfig, synth_corpus
        from signdetect.pose_features import normalize_sequence
        raw = {s.source_id: s for s, _ in synth_corpus(SynthConfig(seed=9, sequences=12))}
        pose_seq = normalize_sequence(raw[seq.source_id])
        lines = "\n".join(encode_frame_line(t, f) for t, f in enumerate(pose_seq.frames))
        monkeypatch.setattr("sys.stdin", io.StringIO(lines + "\n"))
        assert main(["stream", "--model", str(lstm_model), "--fps", "50"]) == 0
        out_lines = [json.loads(l) for l in capsys.readouterr().out.strip().split("\n")]
        got = [o["signing"] for o in out_lines]
        assert got == list(want)
        assert [o["t"] for o in out_lines] == list(range(len(seq)))

    def test_stream_rejects_linear_model(self, synth_dir, tmp_path, capsys, monkeypatch):
        out = tmp_path / "lin.sgns"
        assert main(["train", "--data", str(synth_dir / "sgnf"), "--model", "linear",
                     "--window", "1", "--out", str(out)]) == 0
        monkeypatch.setattr("sys.stdin", io.StringIO(""))
        assert main(["stream", "--model", str(out)]) == 2


class TestBenchAndInspect:
    def test_bench_runs_and_prints(self, lstm_model, capsys):
        assert main(["bench", "--model", str(lstm_model), "--frames", "1000",
                     "--reps", "3"]) == 0
        out = capsys.readouterr().out
        assert "pooled" in out

    def test_inspect_linear_1_emits_25_coefficients(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "lin1.sgns"
        assert main(["train", "--data", str(synth_dir / "sgnf"), "--model", "linear",
                     "--window", "1", "--out", str(out)]) == 0
        capsys.readouterr()
        assert main(["inspect", "--model", str(out)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        coef_lines = [l for l in lines if l and l[0].isdigit()]
        assert len(coef_lines) == 25
        assert coef_lines[0].startswith("0,nose,")

    def test_inspect_lstm_emits_column_norms(self, lstm_model, capsys):
        assert main(["inspect", "--model", str(lstm_model)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        coef_lines = [l for l in lines if l and l[0].isdigit()]
        assert len(coef_lines) == 25

    def test_corrupt_model_exits_2(self, tmp_path):
        bad = tmp_path / "bad.sgns"
        bad.write_bytes(b"JUNKJUNKJUNK")
        assert main(["bench", "--model", str(bad)]) == 2
