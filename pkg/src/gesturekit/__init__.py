"""gesturekit: online hand-gesture recognition over frame streams.

A two-stage pipeline localizes and classifies dynamic gestures in a
real-time video stream: a lightweight binary detector gates a
multi-class classifier, sliding-window fusion stabilizes both, and
early/late decision thresholds trade latency against recall. Neural
inference is pluggable; a deterministic synthetic oracle backend makes
the whole pipeline testable without any model.
"""

from .backend import (
    GESTURE,
    JESTER_LABELS,
    NO_GESTURE,
    PERFORMABLE_LABELS,
    BackendInfo,
    DelayedBackend,
    LabelSet,
    OracleBackend,
    OracleScript,
    OracleSegment,
    ProbabilityVector,
    StubBackend,
    oracle_probabilities,
)
from .classifier import (
    EARLY,
    LATE,
    NONE,
    ClassificationOutcome,
    FusionWeights,
    classify,
    cosine_weight,
    fusion_weights,
)
from .detector import (
    DetectionQueue,
    Proposal,
    amend_proposals,
    clip_label,
    decide_mean,
    decide_unanimous,
    merge_proposals,
    propose_offline,
)
from .errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    GestureKitError,
    InfeasibleScenarioError,
    InsufficientHistoryError,
    InvalidFrameError,
    ProtocolViolationError,
    RemoteBackendError,
    ShapeMismatchError,
    SourceError,
    StreamGapError,
    UndefinedMetricError,
)
from .evaluation import (
    EvalReport,
    LabelSequence,
    evaluate,
    format_report,
    levenshtein_accuracy,
    levenshtein_distance,
    read_events_jsonl,
    read_truth_csv,
    write_truth_csv,
)
from .pipeline import (
    GestureEvent,
    OnlinePipeline,
    Phase,
    PipelineConfig,
    RunSummary,
    StageLatency,
    latency_report,
    run,
    run_offline,
)
from .remote import RemoteBackend
from .scenario import (
    Scenario,
    ScriptedGesture,
    frame_source,
    generate,
    ground_truth,
    load_toml,
    oracle_backends,
    save_toml,
)
from .sources import frames_from_directory, frames_from_stdin, synthetic_frames
from .stream import Clip, Frame, FrameBuffer, RawFrame, preprocess, resize_bilinear

__version__ = "0.1.0"
