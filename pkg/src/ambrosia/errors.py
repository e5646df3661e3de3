"""Exception hierarchy shared by all modules."""


class AmbrosiaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AmbrosiaError, ValueError):
    """Bad input: malformed file, out-of-range parameter, non-finite value."""


class InsufficientHistory(AmbrosiaError):
    """A forecaster was asked to predict before it had enough observations."""


class NotFitted(AmbrosiaError):
    """An autoregressive model was used before its coefficients were fitted."""


class StreamCorruption(AmbrosiaError):
    """The received transmission stream is inconsistent with the protocol."""


class ChannelSaturated(AmbrosiaError):
    """Transmit time per interval exceeds the interval itself."""
