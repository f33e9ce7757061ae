"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid argument, configuration value, or data contract violation."""


class CorpusError(ValidationError):
    """A corpus directory or clip does not conform to the on-disk layout."""


class ConfigMismatchError(ValidationError):
    """Requested run configuration is incompatible with a stored checkpoint."""


class NonFiniteLossError(RuntimeError):
    """Training loss became NaN or infinite; carries the offending clip ids."""

    def __init__(self, message: str, clip_ids: list[str]):
        super().__init__(message)
        self.clip_ids = clip_ids
