"""Exception hierarchy.

Every model-domain failure derives from :class:`ModelError` so the CLI can map
them to a single exit code.
"""


class ModelError(ValueError):
    """Input lies outside the domain of the moment model."""


class ZeroMeanVector(ModelError):
    """Quadrature mean vector is (numerically) zero; phase is undefined."""


class NonPositiveAmplitude(ModelError):
    pass


class ZeroLossCavity(ModelError):
    pass


class GainBelowUnity(ModelError):
    pass


class AtOrAboveThreshold(ModelError):
    """Pump parameter d >= 1: the OPO oscillates and the model does not apply."""


class OutOfModelRange(ModelError):
    """sigma**2 too large for exp/cosh/sinh to be evaluated meaningfully."""


class MultipleCrossings(ModelError):
    """More than one sign change of the variance advantage on the scan grid."""


class InsufficientSamples(ModelError):
    pass


class UnknownFigure(ValueError):
    """Figure id not among the reproducible datasets (a usage error, not a model one)."""
