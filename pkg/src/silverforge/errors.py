"""Exceptions raised across the package."""


class SilverforgeError(Exception):
    """Base class for all package errors."""


class RankDeficient(SilverforgeError):
    pass


class UnsupportedSize(SilverforgeError):
    pass


class StructureViolation(SilverforgeError):
    pass


class DimensionMismatch(SilverforgeError):
    pass


class DependentLayers(SilverforgeError):
    pass


class SearchTooLarge(SilverforgeError):
    pass


class ConfigInvalid(SilverforgeError):
    """Bad simulation configuration. ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
