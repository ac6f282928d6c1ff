"""Exception types shared by the library and the command line."""


class SuperbroadcastError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SuperbroadcastError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(SuperbroadcastError, RuntimeError):
    """A numerical pre- or post-condition was violated."""


class CapacityError(SuperbroadcastError, MemoryError):
    """The requested size exceeds what the dense code paths support."""
