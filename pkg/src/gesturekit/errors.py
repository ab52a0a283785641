"""Exception types shared across the pipeline."""


class GestureKitError(Exception):
    """Base class for all gesturekit errors."""


class InvalidFrameError(GestureKitError):
    """Raw frame has degenerate dimensions or a malformed pixel buffer."""


class StreamGapError(GestureKitError):
    """Pushed frame index is not consecutive with the buffer contents."""


class InsufficientHistoryError(GestureKitError):
    """Requested clip frames were evicted or have not arrived yet."""


class ShapeMismatchError(GestureKitError):
    """Clip or probability vector shape disagrees with the backend contract."""


class ProtocolViolationError(GestureKitError):
    """Remote backend sent a malformed or out-of-contract message."""


class BackendUnavailableError(GestureKitError):
    """Remote backend is unreachable or its connection closed."""


class BackendTimeoutError(GestureKitError):
    """Remote backend did not answer within the configured timeout."""


class RemoteBackendError(GestureKitError):
    """Remote backend reported a failure for a specific request."""


class SourceError(GestureKitError):
    """Frame source failed to produce the next frame."""


class InfeasibleScenarioError(GestureKitError):
    """Requested gestures cannot be packed into the scenario duration."""


class UndefinedMetricError(GestureKitError):
    """Metric is undefined for the given input (e.g. empty target)."""
