# %% [markdown]
# # How fast is one step?
#
# For live use the engine has to keep up with the camera: at 50 fps there are
# 20 ms per frame, and the pose estimator needs most of that.  This benchmark
# times the full engine step (normalization, flow, recurrent update,
# probability) for each input variant on synthetic frames.

# %%
from signdetect import LstmClassifier, PointSubset
from signdetect.streaming import bench, format_bench_report

for subset in (PointSubset.BBOX, PointSubset.POSE_BODY, PointSubset.POSE_HANDS,
               PointSubset.POSE_ALL):
    model = LstmClassifier.initialize(subset.dim, subset=subset, seed=0)
    result = bench(model, subset, frames=5000, reps=3)
    pooled = result.pooled
    print(f"{subset.value:>10}: mean {pooled.mean_us:7.1f} us   p99 {pooled.p99_us:7.1f} us   "
          f"{pooled.frames_per_second:8.0f} frames/s")

# %% [markdown]
# Full per-repetition breakdown for the largest input.

# %%
model = LstmClassifier.initialize(137, subset=PointSubset.POSE_ALL, seed=0)
print(format_bench_report(bench(model, PointSubset.POSE_ALL, frames=5000, reps=3)))
