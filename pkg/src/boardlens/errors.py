"""Exception hierarchy shared by every boardlens module."""


class BoardlensError(Exception):
    """Base class for domain errors (CLI exit status 1)."""


class EmptyRegion(BoardlensError):
    pass


class PnmError(BoardlensError):
    """Malformed PNM data. ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class PnmHeaderError(PnmError):
    pass


class PnmTruncatedError(PnmError):
    pass


class PnmMaxvalError(PnmError):
    pass


class FormatMismatch(BoardlensError):
    pass


class DomainError(BoardlensError):
    pass


class ConstantImage(BoardlensError):
    pass


class ImageTooSmall(BoardlensError):
    pass


class DegenerateInput(BoardlensError):
    pass


class ConstantTemplate(BoardlensError):
    pass


class WindowOutOfBounds(BoardlensError):
    pass


class AllOneClass(BoardlensError):
    pass


class ZeroDenominator(BoardlensError):
    pass


class InfeasibleK(BoardlensError):
    pass


class BehindCamera(BoardlensError):
    pass


class SchemaError(BoardlensError):
    """Bad key=value file. Carries the offending field and line number."""

    def __init__(self, message, field=None, line=None, path=None):
        self.field = field
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{message} [{', '.join(where)}]"
        super().__init__(message)


class InvalidPlan(BoardlensError):
    pass


class AnnotationError(BoardlensError):
    pass


class StageError(BoardlensError):
    """Wraps a failure inside one pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
