"""Exception taxonomy shared across the toolkit."""


class TraceSimError(Exception):
    """Base class for all toolkit errors."""


class MalformedReport(TraceSimError):
    """Crash-report input (raw text or corpus line) that cannot be parsed."""


class EmptyCorpus(TraceSimError):
    """An index was requested over zero stack traces."""


class IoFailure(TraceSimError):
    """A data file could not be read or written."""


class CorruptIndex(TraceSimError):
    """An index file is truncated or fails schema validation."""


class InvalidRank(TraceSimError, ValueError):
    """A frame rank below 1 was passed to the positional weight."""


class DegenerateLabels(TraceSimError):
    """A labeled sample contains only one class."""


class InsufficientPairs(TraceSimError):
    """A split would leave the train or test side empty."""


class DegenerateSizes(TraceSimError):
    """Issue-size bucketing needs at least one issue of size >= 2."""


class InvalidSpace(TraceSimError, ValueError):
    """A hyperparameter search space has inconsistent bounds."""


class InvalidConfig(TraceSimError, ValueError):
    """A generator configuration violates its invariants."""


class InsufficientData(TraceSimError):
    """The generated corpus cannot supply the requested labeled pairs."""
