"""Exception hierarchy.

Every solver failure is a subclass of :class:`WeakSingError`; the CLI maps
these to exit code 4 and prints the class name.
"""


class WeakSingError(Exception):
    """Base class for all package errors."""


class ConfigError(WeakSingError, ValueError):
    """Malformed weight or run configuration."""


class BadParameter(WeakSingError, ValueError):
    pass


class TrivialWeight(WeakSingError, ValueError):
    """The mean-zero part of the weight vanishes identically."""


class OutOfDomain(WeakSingError, ValueError):
    pass


class NonPositive(WeakSingError, ValueError):
    pass


class GridTooCoarse(WeakSingError, ValueError):
    pass


class BadAnchor(WeakSingError, ValueError):
    """Anchor ``a`` does not exceed ``sqrt(lambda * alpha)``."""


class OutsideLambda(WeakSingError):
    """A state left the positivity set (``A_xi[f] <= 0`` at some node)."""


class NoConvergence(WeakSingError):
    pass


class SeedFailure(WeakSingError):
    pass


class BetaUnreachable(WeakSingError):
    pass


class EmptyMinSet(WeakSingError, ValueError):
    pass


class NotSignChanging(WeakSingError, ValueError):
    pass


class NoRoot(WeakSingError):
    pass


class BadMean(WeakSingError, ValueError):
    pass


class QuadratureError(WeakSingError):
    pass


class FloorHit(WeakSingError):
    """Trajectory reached ``u <= u_floor``; ``t`` is the hitting time."""

    def __init__(self, t, u0=None, v0=None):
        self.t = t
        self.u0 = u0
        self.v0 = v0
        msg = f"u fell below the floor at t={t:.6g}"
        if u0 is not None:
            msg += f" (start u0={u0:.6g}, v0={v0:.6g})"
        super().__init__(msg)
