"""Exception types shared across the library."""


class LightEsdError(Exception):
    """Base class for all library errors."""


class ValidationError(LightEsdError):
    """Input data or configuration failed a precondition."""


class NonFinite(ValidationError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"non-finite value at index {index}")


class TooShort(ValidationError):
    def __init__(self, n, minimum=None):
        self.n = n
        msg = f"series too short: n={n}"
        if minimum is not None:
            msg += f" (minimum {minimum})"
        super().__init__(msg)


class NonMonotonicTimestamps(ValidationError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"timestamps not strictly increasing at index {index}")


class InvalidParam(ValidationError):
    pass


class SegmentTooLong(ValidationError):
    pass


class PeriodOutOfRange(ValidationError):
    def __init__(self, period, n):
        self.period = period
        self.n = n
        super().__init__(f"period {period} outside [2, {n // 2}] for n={n}")


class DomainError(LightEsdError):
    pass


class DegenerateDf(LightEsdError):
    def __init__(self, n, l):
        super().__init__(f"degrees of freedom n-l-2 = {n - l - 2} < 1 (n={n}, l={l})")


class DegenerateScale(LightEsdError):
    pass


class PlacementExhausted(LightEsdError):
    pass


class ZeroMean(LightEsdError):
    pass


class WeightSumZero(LightEsdError):
    pass
