"""
Error hierarchy for scenarios, models, linear programs and certification
"""


class ContextualityError(Exception):
    """Base class for every error raised by the package"""


# Scenarios

class ScenarioError(ContextualityError, ValueError):
    """Malformed measurement scenario"""


class CoverViolation(ScenarioError):
    pass


class DuplicateLabel(ScenarioError):
    pass


class EmptyContext(ScenarioError):
    pass


class UnknownMeasurementInContext(ScenarioError):
    pass


class SizeCapExceeded(ContextualityError):
    """Dense incidence matrix would exceed the configured number of entries"""

    def __init__(self, entries: int, cap: int):
        self.entries = entries
        self.cap = cap
        super().__init__(f"Incidence matrix needs {entries} entries, cap is {cap}")


# Empirical models

class ModelError(ContextualityError, ValueError):
    """Malformed empirical model or invalid operation on models"""


class NegativeProbability(ModelError):
    pass


class NormalizationViolation(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class NotASubset(ModelError):
    pass


class ScenarioMismatch(ModelError):
    pass


class LambdaOutOfRange(ModelError):
    pass


# Linear programming

class LinearProgramError(ContextualityError, ValueError):
    """Inconsistent program dimensions or unsupported shape"""


class NumericalFailure(ContextualityError):
    """Solver did not reach a certified optimum"""


class DegenerateResidual(ContextualityError):
    """Decomposition residual requested where it does not exist"""


class CorrectedBoundViolation(ContextualityError):
    """
    A hidden-variable model met 2*eta + sigma < 1 yet realized CF > eta.
    Only a solver or construction bug can cause it.
    """


# Hidden-variable models and catalog builders

class HvmError(ContextualityError, ValueError):
    pass


class AlphaOutOfRange(HvmError):
    pass


class NTooSmall(HvmError):
    pass


class BadOutcomeChoice(HvmError):
    pass


# Certification

class EstimatorInputError(ContextualityError, ValueError):
    pass


class MissingField(EstimatorInputError):
    pass


class OutOfRange(EstimatorInputError):
    pass


class ManualValueMissing(EstimatorInputError):
    pass


class BoundsInverted(ContextualityError, ValueError):
    pass


# Documents

class DocumentParseError(ContextualityError):
    """Document is not valid JSON or misses a required section"""
