# %% [markdown]
# # The live engine: one frame in, one probability out
#
# The streaming session is what a videoconferencing client would run: it
# rescales each frame by the trailing-window shoulder width, computes the
# per-point speeds against the previous frame, advances the recurrent state
# once, and emits a signing probability.  Nothing about the stream's future
# or length is needed, and memory stays constant.

# %%
import numpy as np

from signdetect import (
    EngineConfig, EngineSession, LstmClassifier, NormalizationMode, PointSubset,
    TrainConfig, split_corpus, train,
)
from signdetect.dataio import SynthConfig, synth_corpus, synth_labeled_corpus
from signdetect.pose_features import normalize_sequence

corpus = synth_labeled_corpus(SynthConfig(seed=2, sequences=16), PointSubset.POSE_BODY)
train_set, dev_set, _ = split_corpus(corpus)
model, _ = train(train_set, TrainConfig(epochs=8, seed=2), dev=dev_set)

# %% [markdown]
# Replay a fresh clip through the engine exactly as a live client would,
# shoulder normalization and all (trailing-window mode).

# %%
clip, segments = synth_corpus(SynthConfig(seed=77, sequences=1, mean_duration_s=10.0))[0]
session = EngineSession(EngineConfig(model, PointSubset.POSE_BODY, clip.fps,
                                     NormalizationMode.TRAILING_WINDOW))
probabilities = [session.step(frame).probability for frame in clip.frames]
print(f"processed {session.frame_count} frames; "
      f"trailing scale converged to {session.current_scale:.3f}")

# %%
# probability trace, one character per quarter second
from signdetect.dataio import labels_from_gloss

labels = labels_from_gloss(segments, len(clip), clip.fps)
step = int(clip.fps / 4)
trace = "".join(str(min(int(np.mean(probabilities[i:i + step]) * 10), 9))
                for i in range(0, len(probabilities), step))
gold = "".join("#" if labels[i:i + step].mean() > 0.5 else "." for i in range(0, len(labels), step))
print("p(signing) 0-9:", trace)
print("gold          :", gold)

# %% [markdown]
# In per-sequence mode the engine reproduces the offline forward pass too;
# that equivalence is what makes offline accuracy numbers trustworthy for the
# live deployment.

# %%
normalized = normalize_sequence(clip)
session = EngineSession(EngineConfig(model, PointSubset.POSE_BODY, clip.fps,
                                     NormalizationMode.PER_SEQUENCE))
live = np.array([session.step(f).probability for f in normalized.frames])

from signdetect import extract_features, forward_sequence, predict
offline_logits = forward_sequence(model, extract_features(normalized, PointSubset.POSE_BODY))
offline = np.array([predict(z)[1] for z in offline_logits])
print(f"max |live - offline| probability difference: {np.abs(live - offline).max():.2e}")
