# %% [markdown]
# # From pose landmarks to motion features
#
# A pose frame is 137 landmarks: 25 body points, 70 face points, and 21 per
# hand, each an (x, y, confidence) triple.  The model never sees coordinates
# directly; it sees how fast each point moves.  This script builds a short
# synthetic conversation, normalizes it so the signer's shoulder width is 1,
# and prints slices of the resulting feature matrix.

# %%
import numpy as np

from signdetect import (
    PointSubset, extract_features, normalize_sequence, shoulder_distance,
)
from signdetect.dataio import SynthConfig, labels_from_gloss, synth_corpus

sequence, segments = synth_corpus(SynthConfig(seed=4, sequences=1, mean_duration_s=14.0))[0]
labels = labels_from_gloss(segments, len(sequence), sequence.fps)
print(f"{len(sequence)} frames at {sequence.fps:g} fps, "
      f"{labels.mean():.0%} of them during signing")

# %% [markdown]
# Shoulder normalization removes camera distance from the equation: after it,
# every speed is measured in shoulder-widths per second.

# %%
raw_width = shoulder_distance(sequence.frames[0])
normalized = normalize_sequence(sequence)
print(f"shoulder distance before {raw_width:.3f}, "
      f"after {shoulder_distance(normalized.frames[0]):.3f}")

# %% [markdown]
# Each feature row is the per-point speed between two consecutive frames
# (row 0 is zero: there is no predecessor).  Wrists (body points 4 and 7)
# light up during signing spans and stay quiet otherwise.

# %%
features = extract_features(normalized, PointSubset.POSE_BODY)
wrists = features[:, [4, 7]].mean(axis=1)
signing_speed = wrists[labels == 1].mean()
quiet_speed = wrists[labels == 0].mean()
print(f"mean wrist speed while signing: {signing_speed:.2f} widths/s")
print(f"mean wrist speed while quiet:   {quiet_speed:.2f} widths/s")

# %%
# a coarse "heat strip" of wrist motion against the gold labels
bins = np.array_split(np.arange(len(sequence)), 60)
strip = "".join(" .:-=+*#%@"[min(int(wrists[b].mean() * 2), 9)] for b in bins)
gold = "".join("#" if labels[b].mean() > 0.5 else " " for b in bins)
print("motion ", strip)
print("signing", gold)

# %% [markdown]
# The four landmark subsets trade accuracy against input size: all 137
# points, the 25 body points, the 42 hand points, or 8 bounding-box corners.

# %%
for subset in PointSubset:
    matrix = extract_features(normalized, subset)
    print(f"{subset.value:>10}: feature matrix {matrix.shape[0]} x {matrix.shape[1]}")
