"""Exception types shared across the toolkit.

Everything raised on purpose derives from WsnerError so the CLI can turn
any pipeline failure into a one-line diagnostic and a nonzero exit code.
"""


class WsnerError(Exception):
    """Base class for all toolkit errors."""


class LabelFormatError(WsnerError):
    """A label string is not O, B-TYPE or I-TYPE with a known TYPE."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class Iob2ValidationError(WsnerError):
    """A label sequence violates the IOB2 invariant."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SpanConflictError(WsnerError):
    """Spans overlap each other or fall outside the sentence."""


class ParseError(WsnerError):
    """A data file is malformed; message carries path and line number."""

    def __init__(self, message: str, path=None, line: int | None = None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class MarkupError(WsnerError):
    """Anchor markup in an abstract body is malformed."""


class AlignmentError(WsnerError):
    """Two corpora (or an id pairing) do not line up."""


class EmptyDatasetError(WsnerError):
    """An operation that needs data was given none."""


class ConfigError(WsnerError):
    """Model or task configuration is internally inconsistent."""


class ShapeError(WsnerError):
    """Two sequences that must be aligned have different lengths."""


class DivergenceError(WsnerError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, stage: int, epoch: int, batch: int):
        super().__init__(message)
        self.stage = stage
        self.epoch = epoch
        self.batch = batch


class CheckpointError(WsnerError):
    """A checkpoint file cannot be read back into a model."""
