"""Exception hierarchy shared by every nilkex module."""


class NilkexError(Exception):
    pass


class PlatformError(NilkexError, ValueError):
    """Invalid platform parameters (non-prime modulus, m < 2, ...)."""


class PlatformMismatchError(NilkexError, ValueError):
    """Elements from two different platform instances were combined."""


class DecodeError(NilkexError, ValueError):
    """Malformed canonical bytes: wrong length, out-of-range entry, bad magic."""


class SetupError(NilkexError, ValueError):
    """Session parameters that would give a degenerate or unverified key."""


class UnsupportedPlatformError(NilkexError):
    pass


class NotAPowerError(NilkexError, ValueError):
    """The target element is not a power of the base."""
