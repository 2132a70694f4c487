"""Exception hierarchy shared by the library and the command line."""


class PdcError(Exception):
    """Base class for all errors raised by pdcperm."""


class DomainError(PdcError, ValueError):
    """An argument lies outside the domain of a numerical routine."""


class DataError(PdcError, ValueError):
    """Input data could not be ingested or violates a dataset invariant."""


class DegenerateError(PdcError):
    """A statistic is undefined for the given data (zero spread, zero direction)."""


class DegenerateDirectionError(DegenerateError):
    """A separating direction could not be normalised (zero mean difference)."""


class ZeroVarianceError(DegenerateError):
    """The permutation null sample has zero standard deviation."""


class RegistryError(PdcError, KeyError):
    """Unknown or duplicate direction name."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
