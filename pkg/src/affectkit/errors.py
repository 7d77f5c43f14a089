"""Exception types raised across the toolkit.

Each class names the condition it reports; modules document which ones they
raise. Everything derives from :class:`AffectkitError` so callers can catch
the package's failures in one clause.
"""


class AffectkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidSpec(AffectkitError):
    """A windowing/transform parameter set is structurally invalid."""


class StreamTooShort(AffectkitError):
    """Signal shorter than a single analysis window."""


class EmptyRange(AffectkitError):
    """A label index range contains no samples."""


class NonFiniteInput(AffectkitError):
    """Input contains NaN or infinity."""


class OrderOutOfRange(AffectkitError):
    """Requested series order lies outside 1..U."""


class SpectrumTooShort(AffectkitError):
    """Spectrum (or window) too short for boundary detection."""


class DegenerateInput(AffectkitError):
    """All values identical where a two-class split is required."""


class InvalidXi(AffectkitError):
    """Transition half-width violates the tight-frame bound."""


class TooManyModes(AffectkitError):
    """Mode count exceeds the configured maximum."""


class InsufficientData(AffectkitError):
    """Not enough labeled data (e.g. fewer than two classes present)."""


class DimensionMismatch(AffectkitError):
    """Array shapes disagree with the model or with each other."""


class EmptyInput(AffectkitError):
    """An input collection that must be nonempty is empty."""


class InvalidDistribution(AffectkitError):
    """A probability vector is malformed (negative mass, wrong sum, ...)."""


class EmptyTeam(AffectkitError):
    """Fusion requested over zero members."""


class SizeOutOfRange(AffectkitError):
    """Requested team size is outside 1..n."""


class MissingModality(AffectkitError):
    """A required modality is absent from the inputs."""


class IngestionError(AffectkitError):
    """A corpus file is missing, malformed, or internally inconsistent."""


class ConfigError(AffectkitError):
    """Pipeline configuration failed validation."""
