"""Per-frame sign-language detection from pose-landmark streams.

The pipeline: pose frames -> shoulder normalization -> per-point speed
features -> a tiny recurrent (or fixed-context linear) classifier -> a
signing probability per frame, with training, span-level error analysis,
and latency benchmarking built in.
"""

from .errors import (
    CorruptFeatureFile, CorruptModelFile, DegeneratePose, DimensionMismatch,
    EmptyCorpus, EmptyInput, LengthMismatch, MissingFps, ParseError,
    ShapeMismatch, SignDetectError,
)
from .pose_features import (
    BODY_POINT_NAMES, POINT_COUNT, BodyPart, NormalizationMode, PointSubset,
    PoseSequence, extract_features, flow_step, normalize_sequence, part_bbox,
    select_points, shoulder_distance, video_id,
)
from .models import (
    HIDDEN_UNITS, LinearClassifier, LstmClassifier, LstmState, forward_sequence,
    linear_forward, linear_logit, load, lstm_step, param_count, predict, save,
)
from .training import (
    EpochRecord, LabeledSequence, TrainConfig, backward, nll_loss, split_corpus,
    train, train_linear,
)
from .evaluation import (
    ErrorEvent, ErrorType, Span, SpanStats, classify_errors, error_report,
    error_report_csv, extract_spans, format_error_report, frame_accuracy,
    sequence_stats,
)
from .streaming import (
    BenchReport, EngineConfig, EngineSession, LatencyStats, StepOutput, bench,
)
from .dataio import (
    GlossSegments, PoseFileHeader, SynthConfig, labels_from_gloss, load_features,
    load_gloss_csv, load_pose_file, save_features, synth_corpus,
    synth_labeled_corpus, write_gloss_csv, write_pose_file,
)

__version__ = "0.1.0"
