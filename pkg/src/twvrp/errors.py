"""Exception types shared across the package."""

import os


class InstanceError(ValueError):
    """An instance, routing or decomposition document failed validation.

    ``path`` names the offending field (``"edges[3]"``, ``"demands.4"``...)
    when one can be pinned down.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class UnsupportedVariantError(ValueError):
    pass


class RoutingError(ValueError):
    """An edge multiset cannot be turned into a routing."""


class ScaleGuardError(RuntimeError):
    """The requested exact algorithm refuses to run at this input size."""


def scale_guard_enabled() -> bool:
    """Size caps apply unless TWVRP_SCALE_GUARD is off, 0 or false."""
    return os.environ.get("TWVRP_SCALE_GUARD", "on").lower() not in ("off", "0", "false")
