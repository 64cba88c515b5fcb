class ConfigError(ValueError):
    """Inconsistent or invalid convolution / generation configuration."""


class UnsupportedConfigError(ConfigError):
    """Configuration is valid but outside what a sparse path implements."""


class ShapeError(ValueError):
    pass


class CorruptionError(ValueError):
    """An encoded stream failed a structural check while being decoded."""


class IncompleteProfileError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass
