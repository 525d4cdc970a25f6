# utils/exceptions.py
"""
Exception hierarchy for the mobility toolkit
"""


class MobilityError(ValueError):
    """Base class for every error the toolkit raises on bad input."""


class InvalidRecordError(MobilityError):
    pass


class EmptyTraceError(MobilityError):
    def __init__(self, message: str = "empty trace"):
        super().__init__(message)


class OutOfFrameError(MobilityError):
    def __init__(self, message: str = "out of frame"):
        super().__init__(message)


class UnsortedPointsError(MobilityError):
    def __init__(self, message: str = "unsorted"):
        super().__init__(message)


class NoDonorsError(MobilityError):
    def __init__(self, message: str = "no donors"):
        super().__init__(message)


class PltFormatError(MobilityError):
    def __init__(self, message: str = "not a PLT file"):
        super().__init__(message)


class TruthDensityError(MobilityError):
    """Raised when a trace is too sparse to serve as ground truth."""


class ConfigurationError(MobilityError):
    pass
