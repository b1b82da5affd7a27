# %% [markdown]
# # Training the detector and reading its error taxonomy
#
# Trains the recurrent classifier and the single-frame linear baseline on a
# synthetic corpus, then breaks their mistakes down into the eight span-level
# error categories: errors at span starts, span ends, bridged gaps, skipped
# sections, and spurious detections each tell a different story.

# %%
import numpy as np

from signdetect import (
    PointSubset, TrainConfig, classify_errors, error_report,
    format_error_report, forward_sequence, frame_accuracy, linear_forward,
    split_corpus, train, train_linear,
)
from signdetect.dataio import SynthConfig, synth_labeled_corpus

corpus = synth_labeled_corpus(SynthConfig(seed=1, sequences=24), PointSubset.POSE_BODY)
train_set, dev_set, test_set = split_corpus(corpus)
print(f"{len(train_set)} train / {len(dev_set)} dev / {len(test_set)} test sequences")

# %% [markdown]
# The LSTM trains with truncated backpropagation through time and early
# stopping on dev accuracy; the baseline is plain full-batch logistic
# regression over the current frame.

# %%
model, history = train(train_set, TrainConfig(epochs=12, seed=0), dev=dev_set)
for record in history:
    print(f"epoch {record.epoch:2d}  loss {record.train_loss:.4f}  "
          f"dev_acc {record.dev_accuracy:.4f}")
linear = train_linear(train_set, 1)

# %%
def lstm_predict(feats):
    logits = forward_sequence(model, feats)
    return (logits[:, 1] > logits[:, 0]).astype(np.uint8)

def linear_predict(feats):
    return (linear_forward(linear, feats) > 0).astype(np.uint8)

for name, predict_fn in (("lstm", lstm_predict), ("linear-1", linear_predict)):
    accs = [frame_accuracy(predict_fn(s.features), s.labels) for s in test_set]
    print(f"{name:>8}: test frame accuracy {np.mean(accs):.4f}")

# %% [markdown]
# Accuracy alone hides *where* a detector fails.  The taxonomy below counts
# mismatch spans by kind; a videoconferencing UI cares far more about skipped
# signing sections than about a few frames of overflow after a sign ends.

# %%
for name, predict_fn in (("lstm", lstm_predict), ("linear-1", linear_predict)):
    events = []
    for seq in test_set:
        events.extend(classify_errors(seq.labels, predict_fn(seq.features), seq.fps))
    print(f"--- {name} ---")
    print(format_error_report(error_report(events)))
