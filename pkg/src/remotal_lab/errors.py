"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by remotal_lab."""


class InvalidInput(LabError, ValueError):
    pass


class DomainError(LabError, ValueError):
    pass


class HorizonExceeded(LabError):
    """A window reaches past the enumeration cap and no closed-form count exists."""


class CertificateMismatch(LabError, AssertionError):
    """A closed-form count disagrees with brute-force enumeration."""


class InvalidWindowPair(LabError, ValueError):
    pass


class InvalidWitness(LabError, ValueError):
    pass


class InvalidSubset(LabError, ValueError):
    pass


class DimensionCap(LabError, ValueError):
    pass


class ConfigError(LabError, ValueError):
    """Malformed scenario config; ``path`` names the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
