"""Exception hierarchy shared by all shiftlab modules."""


class ShiftlabError(Exception):
    """Base class for every error raised by shiftlab."""


class InvalidWeightError(ShiftlabError, ValueError):
    """A weight is zero, negative or not finite."""

    def __init__(self, which, k, value):
        self.which = which
        self.k = k
        self.value = value
        super().__init__(f"{which}{tuple(k)} = {value!r} is not a positive finite weight")


class OutOfTableError(ShiftlabError, IndexError):
    """A table-backed diagram was asked for a weight outside its extent."""


class NotSymmetricError(ShiftlabError, ValueError):
    pass


class InsufficientMomentsError(ShiftlabError, ValueError):
    pass


class MeasureError(ShiftlabError, ValueError):
    """An atomic measure operation is undefined for the given input."""


class HypothesisError(ShiftlabError):
    """The hypotheses of a closed-form test do not hold, so it gives no verdict."""


class UnsupportedDiagramError(ShiftlabError):
    """The diagram lacks the structure an operation needs (e.g. a tensor core)."""


class ConstructionError(ShiftlabError):
    """An iterative construction broke down at a specific lattice point."""

    def __init__(self, message, k=None):
        self.k = k
        super().__init__(message if k is None else f"{message} at {tuple(k)}")


class SchemaError(ShiftlabError, ValueError):
    """A JSON document does not describe a valid diagram."""

    def __init__(self, message, path="$"):
        self.path = path
        super().__init__(f"{path}: {message}")
