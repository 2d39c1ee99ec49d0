"""Exception hierarchy shared by every model module."""


class ModelError(ValueError):
    """Base class for all errors raised by exaperf."""


class ParseError(ModelError):
    pass


class ValidationError(ModelError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnitError(ModelError):
    pass


class DegenerateSeries(ModelError):
    pass


class InvalidHorizon(ModelError):
    pass


class MissingDoublingTime(ModelError):
    def __init__(self, field):
        self.field = field
        super().__init__(f"no doubling time for scaled parameter {field!r}")


class InfeasibleDecomposition(ModelError):
    pass


class NotACube(ModelError):
    pass


class InvalidTree(ModelError):
    pass


class CacheOverflow(ModelError):
    pass


class InvalidRate(ModelError):
    pass


class InvalidKappa(ModelError):
    pass


class ZeroTraffic(ModelError):
    pass


class UnknownNode(ModelError):
    pass


class MissingLevels(ModelError):
    pass


class MixedMethods(ModelError):
    pass
