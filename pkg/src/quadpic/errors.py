"""Exception types shared across the engine."""


class QuadPicError(Exception):
    """Base class for all engine errors."""


class ModelError(QuadPicError):
    """Invalid model data, unregistered objects, or contract violations."""


class DisagreementError(QuadPicError):
    """Two independent verdict routes disagreed: the model or a registered
    decomposition is broken.  Never raised for a mere negative verdict."""
