"""Exception hierarchy shared by all v2sg modules."""


class V2sgError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(V2sgError):
    """Input violates a documented precondition or invariant."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class FormatError(V2sgError):
    """Byte stream does not carry the expected container magic/layout."""


class CorruptionError(V2sgError):
    """Container is recognized but its payload is inconsistent/truncated."""


class UnsupportedVersionError(V2sgError):
    """Container version newer than this implementation understands."""


class LoadError(V2sgError):
    """A checkpoint or model file could not be loaded."""


class CapabilityError(V2sgError):
    """A backend lacks a capability required by the requested operation."""


class DetectionError(V2sgError):
    """A perception backend found no usable signal (e.g. no face)."""


class DegenerateFaceError(ValidationError):
    """Landmark geometry is degenerate (zero-length face axis)."""


class OptimizationError(V2sgError):
    """Latent optimization diverged; carries the step trace for diagnosis."""

    def __init__(self, message: str, trace: list[tuple[int, float]] | None = None):
        super().__init__(message)
        self.trace = trace or []


class SessionBusyError(V2sgError):
    """Another writer/render holds the session; retry later."""


class StageError(V2sgError):
    """A pipeline stage failed; names the stage and keeps partial state."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
