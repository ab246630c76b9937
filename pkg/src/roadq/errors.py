"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates an operation's precondition."""


class ConfigError(ValueError):
    """A configuration or input document could not be loaded."""


class NoRuleFired(RuntimeError):
    """Every rule of a fuzzy system evaluated to zero strength."""


class ClampWarning(UserWarning):
    """A crisp input fell outside its universe and was clamped."""
