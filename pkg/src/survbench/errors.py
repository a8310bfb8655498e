"""Exception hierarchy shared across the package."""


class SurvbenchError(Exception):
    """Base class for all package errors."""


class ValidationError(SurvbenchError, ValueError):
    """Input violates a data-model invariant."""


class NonPositiveTime(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class DuplicateColumn(ValidationError):
    pass


class MissingValue(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


class ModelError(SurvbenchError):
    """Fitting or prediction failed for a reason tied to the data."""


class EmptyTask(ModelError):
    pass


class NoEvents(ModelError):
    pass


class Nonconvergence(ModelError):
    """Optimizer hit ``max_iter`` or degenerated.

    The last iterate is kept on ``params`` for inspection.
    """

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class SingularHessian(ModelError):
    pass


class FeatureMismatch(ModelError):
    pass


class EmptyNewdata(ModelError):
    pass


class MeasureError(SurvbenchError):
    """A measure could not be computed on the given prediction."""


class MissingPredictType(MeasureError):
    """Required prediction type absent (crank, lp or distr)."""


class MissingCrank(MissingPredictType):
    pass


class MissingDistr(MissingPredictType):
    pass


class MissingLP(MissingPredictType):
    pass


class NoComparablePairs(MeasureError):
    pass


class DegenerateCensoring(MeasureError):
    pass


class EmptyGrid(MeasureError):
    pass


class DegenerateLP(MeasureError):
    pass


class CompositionError(SurvbenchError):
    pass


class MissingLPandCrank(CompositionError):
    pass


class InvalidForm(CompositionError):
    pass


class GridEmpty(CompositionError):
    pass


class ConfigError(SurvbenchError):
    """Invalid benchmark/learner/measure configuration, raised before fitting."""


class TooManyFolds(ConfigError):
    pass
