"""Exception taxonomy shared by all modules."""


class CauseTriggerError(Exception):
    """Base class for every error raised by this package."""


class ConstantSeries(CauseTriggerError):
    """A column has (near-)zero variance and cannot be standardized."""

    def __init__(self, name):
        super().__init__(f"series {name!r} is constant (std <= 1e-12)")
        self.name = name


class DegenerateSeries(CauseTriggerError):
    """No distribution family admits the data (e.g. a constant vector)."""


class LagTooLarge(CauseTriggerError):
    pass


class UnknownVariable(CauseTriggerError):
    def __init__(self, name):
        super().__init__(f"unknown variable {name!r}")
        self.name = name


class EmptyDesign(CauseTriggerError):
    """Removing a block would leave a design with zero columns."""


class DimensionMismatch(CauseTriggerError):
    pass


class TooFewSamples(CauseTriggerError):
    pass


class SingularDesign(CauseTriggerError):
    """Design matrix is rank-deficient beyond what the ridge term absorbs."""


class DegreesOfFreedomError(CauseTriggerError):
    pass


class TooManyVariables(CauseTriggerError):
    def __init__(self, m, limit):
        super().__init__(
            f"{m} variables exceed the exhaustive-search limit of {limit}; "
            "use the genetic backend"
        )
        self.m = m


class IntervalTooShort(CauseTriggerError):
    pass


class SeriesTooShort(CauseTriggerError):
    pass


class EmptyRange(CauseTriggerError):
    pass


class NoEligibleCause(CauseTriggerError):
    pass


class UnstableSystem(CauseTriggerError):
    """Simulated VAR companion matrix has spectral radius >= 1."""


class SchemaError(CauseTriggerError):
    pass


class NonUniformSampling(CauseTriggerError):
    pass


class MissingComponent(CauseTriggerError):
    pass
