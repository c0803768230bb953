"""Exception hierarchy shared by all subsystems."""


class OocranError(Exception):
    """Base class for every error raised by this package."""


# -- descriptors and lifecycle ------------------------------------------------

class ValidationFailed(OocranError):
    """A descriptor failed validation; carries the full violation report."""

    def __init__(self, report):
        super().__init__("; ".join(report))
        self.report = list(report)


class IllegalTransition(OocranError):
    def __init__(self, source, target):
        super().__init__(f"illegal transition {source} -> {target}")
        self.source = source
        self.target = target


class InvariantViolation(OocranError):
    """An operation would leave a domain object in a forbidden state."""


# -- infrastructure simulator -------------------------------------------------

class InvalidCidr(OocranError):
    pass


class UnknownNetwork(OocranError):
    pass


class NetworkInUse(OocranError):
    pass


class CapacityExhausted(OocranError):
    pass


class AddressExhausted(OocranError):
    pass


class UnknownVm(OocranError):
    pass


class WrongClockMode(OocranError):
    pass


class UnknownRRH(OocranError):
    pass


class RRHBusy(OocranError):
    pass


# -- radio resources ----------------------------------------------------------

class DomainError(OocranError):
    """A physical quantity was outside its mathematical domain."""


class SpectrumExhausted(OocranError):
    pass


class PowerExceedsLimit(OocranError):
    pass


class UnknownSlice(OocranError):
    pass


# -- monitoring ---------------------------------------------------------------

class StaleSample(OocranError):
    pass


class DeliveryFailed(OocranError):
    pass


# -- task queue ---------------------------------------------------------------

class UnknownNS(OocranError):
    pass


class UnknownTask(OocranError):
    pass


# -- orchestration ------------------------------------------------------------

class QuotaExceeded(OocranError):
    pass


class ImmutableField(OocranError):
    def __init__(self, field):
        super().__init__(f"field is immutable on a live service: {field}")
        self.field = field


class DuplicateActuator(OocranError):
    pass


class UnknownActuator(OocranError):
    pass


class UnknownAlarm(OocranError):
    pass


class NSNotActive(OocranError):
    pass


# -- planning -----------------------------------------------------------------

class InsufficientCapacity(OocranError):
    pass


class EmptyRepository(OocranError):
    pass


class SwapThrottled(OocranError):
    pass


# -- service ------------------------------------------------------------------

class BadConfig(OocranError):
    pass


class PortInUse(OocranError):
    pass
