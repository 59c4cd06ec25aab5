"""Exception types shared across the package."""


class RiftError(Exception):
    """Base class for rift2 errors."""


class ParameterError(RiftError, ValueError):
    """An argument violates an operation's precondition."""


class FormatError(RiftError, ValueError):
    """A file exists but cannot be decoded as a supported format."""


class ConfigError(RiftError, ValueError):
    """A config file or override contains an unknown key or a bad value."""


class IntegrityError(RiftError):
    """Cross-referenced data (e.g. keypoint ids in a match set) does not resolve."""
