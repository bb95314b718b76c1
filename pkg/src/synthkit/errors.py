"""Exception types shared across the toolkit."""


class SynthkitError(Exception):
    """Base class for all toolkit errors."""


class MissingFile(SynthkitError):
    """A required file of an interchange dump is absent."""

    def __init__(self, path, message=""):
        self.path = str(path)
        super().__init__(f"missing file: {self.path}" + (f" ({message})" if message else ""))


class MalformedHeader(SynthkitError):
    """A binary file has a bad magic number or inconsistent dimensions."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class InvariantViolation(SynthkitError):
    """Decoded data violates a documented invariant."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class OutOfBounds(SynthkitError):
    """Pixel coordinates outside the image grid."""


class ParseError(SynthkitError):
    """A KITTI label line could not be parsed."""

    def __init__(self, line_number, field_index, message):
        self.line_number = line_number
        self.field_index = field_index
        super().__init__(f"line {line_number}, field {field_index}: {message}")


class DegenerateProjection(SynthkitError):
    """An object's projected rectangle has zero area."""


class RangeError(SynthkitError):
    """A parameter value is outside its documented range."""


class EmptyPool(SynthkitError):
    """A dataset split was requested over an empty sample pool."""
