"""Exception types shared across the package."""


class MlcilError(Exception):
    """Base class for all package errors."""


class ShapeError(MlcilError):
    """An array argument has the wrong shape or dimension."""


class NumericsError(MlcilError):
    """A non-finite value showed up where a finite one is required."""


class AnnotationError(MlcilError):
    """A label required to be definite (0/1) is missing."""


class AlignmentError(MlcilError):
    """Two prediction vectors that must cover the same classes do not."""


class RelabelIncompleteError(AnnotationError):
    """Replay loss was asked for before relabeling completed the labels."""


class ProtocolError(MlcilError):
    """Training-loop steps were invoked out of order."""


class ScheduleError(MlcilError):
    """A {Bx-Cy} schedule cannot be built from the given class count."""


class DatasetError(MlcilError):
    """A dataset file or spec violates the dataset contract."""


class EmptyBufferError(MlcilError):
    """Replay was requested from an empty memory buffer."""


class EvaluationError(MlcilError):
    """Evaluation was asked for on empty or degenerate inputs."""


class ConfigError(MlcilError):
    """A run configuration value is unknown, malformed, or out of range."""
