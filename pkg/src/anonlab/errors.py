"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by anonlab."""


class DomainError(LabError, ValueError):
    """An argument lies outside the carrier or domain of the operation."""


class ContractError(LabError):
    """A documented precondition of an operation does not hold."""


class OrbitCapError(LabError):
    """An orbit walk hit its iteration cap without a conclusive answer."""


class InconclusiveError(LabError):
    """A numerical certification could not decide at the requested resolution."""

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion
