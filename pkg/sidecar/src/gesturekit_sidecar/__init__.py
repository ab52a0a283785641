"""gesturekit-sidecar: 3D CNN inference served over the gesture wire protocol."""

from .models import (
    ARCHITECTURES,
    PUBLISHED_PARAM_COUNTS,
    TRAINED_VARIANTS,
    C3D,
    ResNet10,
    ResNeXt101,
    build_model,
    count_parameters,
    parameter_count_matches,
    seeded_checkpoint,
)
from .server import (
    CheckpointMismatchError,
    InferenceSession,
    ModelSpec,
    serve_stdio,
    serve_tcp,
)

__version__ = "0.1.0"
