"""Exception hierarchy.

``MoveletError`` subclasses are domain validation failures (CLI exit 2).
``InputError`` subclasses are malformed or unreadable inputs (CLI exit 1).
"""


class MoveletError(Exception):
    pass


class InputError(Exception):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SeriesTooShort(MoveletError):
    def __init__(self, n_samples, needed, activity=None):
        self.n_samples = n_samples
        self.needed = needed
        self.activity = activity
        what = f"series for {activity!r}" if activity is not None else "series"
        super().__init__(f"{what} has {n_samples} samples, need at least {needed}")


class SensorMismatch(MoveletError):
    pass


class RepMismatch(MoveletError):
    pass


class LengthMismatch(MoveletError):
    pass


class GapTooLarge(MoveletError):
    def __init__(self, position, gap_ms, max_gap_ms):
        self.position = position
        self.gap_ms = gap_ms
        super().__init__(
            f"gap of {gap_ms} ms after row {position} exceeds max_gap_ms={max_gap_ms}"
        )


class TooFewRows(MoveletError):
    pass


class OverlapError(MoveletError):
    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__(f"annotation intervals overlap: {first} and {second}")


class InsufficientTraining(MoveletError):
    def __init__(self, activity, have_seconds, need_seconds):
        self.activity = activity
        self.have_seconds = have_seconds
        self.need_seconds = need_seconds
        super().__init__(
            f"activity {activity!r}: longest labeled run is {have_seconds:g} s, "
            f"need {need_seconds:g} s (short by {need_seconds - have_seconds:g} s)"
        )


class UnknownLabel(MoveletError):
    pass


class EmptySegment(MoveletError):
    pass


class NoSupportedColumns(MoveletError):
    pass
