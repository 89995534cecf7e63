"""Exception hierarchy shared by all miprune modules."""


class MipruneError(Exception):
    """Base class for every error raised by this package."""


class FormatError(MipruneError):
    """Array container is malformed (bad magic, header, or payload length)."""


class UnsupportedLayoutError(MipruneError):
    """Array container is valid but uses a layout we refuse (fortran order,
    non-float dtype, wrong dimensionality)."""


class DataError(MipruneError):
    """Array payload violates a data invariant (NaN/Inf entries, empty shape)."""


class DegenerateEmbeddingError(MipruneError):
    """A row cannot be normalized because its norm is effectively zero."""


class ShapeError(MipruneError):
    """Operands have incompatible shapes or modes."""


class InvalidModeError(MipruneError):
    """Operation called on a table with the wrong cross/self mode."""


class DegenerateRowError(MipruneError):
    """A row has no finite entries left to form a distribution over."""


class ConfigError(MipruneError):
    """Configuration value outside its legal range."""


class ScaleError(MipruneError):
    """Problem size exceeds what an exhaustive oracle can enumerate."""
