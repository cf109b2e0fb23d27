"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2);
``ModelError`` subclasses signal runtime/model failures (exit code 3).
"""


class WeightcraftError(Exception):
    pass


class ValidationError(WeightcraftError, ValueError):
    pass


class DimensionError(ValidationError):
    pass


class OrderingError(ValidationError):
    pass


class NormalizationError(ValidationError):
    pass


class PositiveVFRequiredError(ValidationError):
    def __init__(self, msg: str = "value-faithfulness must be positive"):
        super().__init__(msg)


class UnsupportedDimensionError(ValidationError):
    pass


class UndefinedAUCError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class ModelError(WeightcraftError, RuntimeError):
    pass


class DegenerateNoiseError(ModelError):
    pass


class SweepAbortError(ModelError):
    def __init__(self, axis: str, axis_value: float, reason: str = "value-faithfulness must be positive"):
        self.axis = axis
        self.axis_value = axis_value
        super().__init__(f"sweep aborted on axis {axis} at {axis_value!r}: {reason}")
