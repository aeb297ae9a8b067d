"""Exception hierarchy for lefthand_sim."""


class LefthandError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LefthandError, ValueError):
    """A SystemParameters field violates its invariant."""

    def __init__(self, field, value, message=None):
        self.field = field
        self.value = value
        super().__init__(message or f"{type(self).__name__}({field}): got {value!r}")


class NegativeRate(ParameterError):
    pass


class NonPositiveUnit(ParameterError):
    pass


class NegativeDensity(ParameterError):
    pass


class NonPositiveMoment(ParameterError):
    pass


class UnknownPreset(LefthandError, KeyError):
    def __init__(self, name, valid):
        self.name = name
        self.valid = tuple(valid)
        super().__init__(f"unknown preset {name!r}; valid presets: {', '.join(self.valid)}")

    def __str__(self):
        return self.args[0]


class DivisionByZero(LefthandError, ZeroDivisionError):
    pass


class SingularSystem(LefthandError, ArithmeticError):
    def __init__(self, message, condition=float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class NonPhysical(LefthandError, ArithmeticError):
    pass


class StepTooLarge(LefthandError, ArithmeticError):
    pass


class PoleEncountered(LefthandError, ArithmeticError):
    def __init__(self, n_alpha):
        self.n_alpha = n_alpha
        super().__init__(f"Clausius-Mossotti pole: N*alpha = {n_alpha!r}")


class TooFewPoints(LefthandError, ValueError):
    pass


class IncompatibleGrids(LefthandError, ValueError):
    pass


class ConfigError(LefthandError, ValueError):
    pass


class IoError(LefthandError, OSError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")

    def __str__(self):
        return self.args[0]


class SweepFailed(LefthandError, RuntimeError):
    pass
