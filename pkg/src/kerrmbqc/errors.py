"""Exception hierarchy shared by every layer of the simulator."""


class KerrSimError(Exception):
    """Base class for all simulator errors."""


class InvalidMode(KerrSimError, IndexError):
    pass


class CutoffExceeded(KerrSimError):
    pass


class MismatchedShape(KerrSimError, ValueError):
    pass


class NotNormalized(KerrSimError, ValueError):
    pass


class NotUnitary(KerrSimError, ValueError):
    pass


class NotVacuum(KerrSimError):
    pass


class InvalidDualRailSupport(KerrSimError):
    """A term has zero or two photons in a qubit's mode pair."""


class InvalidGraph(KerrSimError, ValueError):
    pass


class GoldenFileError(KerrSimError):
    """A golden file is missing, malformed or stale."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")
