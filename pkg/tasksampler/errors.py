"""Exception hierarchy shared by every tasksampler module."""


class TaskSamplerError(Exception):
    """Base class for all errors raised by tasksampler."""


class PredictionShapeError(TaskSamplerError, ValueError):
    """Prediction batch does not line up with the episode's queries."""


class ClassRangeError(TaskSamplerError, IndexError):
    """Class id outside the range declared by a matrix or dataset."""


class NonFiniteError(TaskSamplerError, ArithmeticError):
    """A potential, loss or gradient became NaN or infinite."""


class WeightError(TaskSamplerError, ValueError):
    """Selection weights cannot support the requested draw."""


class EnumerationCapError(TaskSamplerError, RuntimeError):
    """Exact enumeration would exceed the configured state cap."""


class DistributionMismatchError(TaskSamplerError, ValueError):
    """Two set distributions live over different universes."""


class PoolExhaustedError(TaskSamplerError, ValueError):
    """A class pool holds fewer points than an episode needs."""


class SplitError(TaskSamplerError, ValueError):
    """A meta split leaves one side with too few classes."""


class DatasetFormatError(TaskSamplerError, ValueError):
    """Dataset file is not a rectangular label/feature table."""


class OracleLookupError(TaskSamplerError, KeyError):
    """Oracle learner has no confusion row for a class."""


class EvaluationLeakError(TaskSamplerError, RuntimeError):
    """A meta-test class appeared in a training episode."""
