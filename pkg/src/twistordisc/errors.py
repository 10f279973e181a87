"""Exception types shared across the package."""


class TwistorDiscError(Exception):
    """Base class for all package errors."""


class InputError(TwistorDiscError):
    """Malformed user input (files, CLI arguments); maps to exit code 2."""


class ZeroQuaternion(TwistorDiscError):
    """Inversion of a quaternion with magnitude at machine scale."""


class CoincidentPlanes(TwistorDiscError):
    """plane_meet called on two projectively equal planes."""


class NullForm(TwistorDiscError):
    """Operation undefined on the identically-zero binary form."""


class SingularMatrix(TwistorDiscError):
    """A substitution or lift matrix is not invertible."""


class InternalInconsistency(TwistorDiscError):
    """A computed object violates an identity that should hold exactly; a numerics bug."""


class EmptyCloud(TwistorDiscError):
    """A point-cloud operation received an empty cloud."""


class TooFewPoints(TwistorDiscError):
    """Not enough distinct points for a dimension estimate."""


class NoSmoothPoints(TwistorDiscError):
    """Surface sampling found no points above the smoothness threshold."""


class DegreeTooHigh(TwistorDiscError):
    """Plane-curve elimination refused beyond the supported section degree."""


class NotIntegral(TwistorDiscError):
    """Surface failed the reducedness/irreducibility checks required for duals."""


class NotACone(TwistorDiscError):
    """A cone-only operation was applied to a surface without a vertex."""
