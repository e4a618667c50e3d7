class HilferError(Exception):
    """
    Base class for every error raised by the library.
    """


class ConfigError(HilferError):
    """
    The inputs are wrong: bad configuration, bad expression, bad parameters.
    Commands exit with status 2 on these.
    """


class ParseError(ConfigError):
    """
    An expression could not be parsed. Carries the UTF-8 byte offset of the
    offending token and the set of tokens that would have been accepted.
    """

    def __init__(self, message: str, offset: int = 0, expected: frozenset = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message} at byte {offset} (expected one of: {', '.join(sorted(self.expected))})"
        else:
            message = f"{message} at byte {offset}"
        super().__init__(message)


class UnknownIdentifier(ParseError):
    def __init__(self, name: str, offset: int = 0, allowed: frozenset = frozenset()):
        self.name = name
        super().__init__(f"Unknown identifier {name!r}", offset, allowed)


class MissingBinding(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"No value bound for variable {name!r}")


class ScheduleError(ConfigError):
    """
    The impulse schedule is not ordered the way the impulse mode requires.
    """


class ParameterError(ConfigError, ValueError):
    """
    A numeric parameter is outside its valid range.
    """


class NumericError(HilferError):
    """
    A computation failed on valid inputs. Commands exit with status 3.
    """


class DomainError(NumericError):
    """
    A function was evaluated outside its domain (log of a non-positive
    number, division by zero, 0 to a negative power, ...).
    """


class PoleError(DomainError):
    pass


class AccuracyNotAttained(NumericError):
    pass


class QuadratureError(NumericError):
    pass


class GridError(NumericError):
    pass


class ConvergenceError(NumericError):
    """
    An iteration did not settle. Reports the interval it was working on and
    how many iterations it spent.
    """

    def __init__(self, message: str, interval: tuple[float, float], iterations: int):
        self.interval = interval
        self.iterations = iterations
        super().__init__(
            f"{message} on ({interval[0]:g}, {interval[1]:g}] after {iterations} iterations"
        )


class ImpulseConvergenceError(ConvergenceError):
    pass


class SolveTimeout(BaseException):
    """
    Raised in runner threads to kill solves that are over their deadline
    """
