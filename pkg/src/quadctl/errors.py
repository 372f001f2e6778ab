"""Exception types raised across the control stack."""


class ControlError(Exception):
    """Base class for every fault the stack can raise."""


class NonFinite(ControlError, ValueError):
    """A matrix entering a public kernel contains NaN or Inf."""


class RankDeficient(ControlError):
    """A pivot fell below tolerance before the expected rank was reached."""


class Singular(ControlError):
    """A small dense inverse was requested on a (near) singular matrix."""


class GimbalSingularity(ControlError):
    """Pitch too close to +-pi/2 for the Euler-rate Jacobian to be inverted."""


class LegSingularity(ControlError):
    """A leg Jacobian is (near) singular, so joint rates are undefined."""


class DegenerateWrench(ControlError):
    """The vertical component of the inertial-plus-gravity force vanishes."""


class EmptyPolygon(ControlError):
    """No foot is grounded, so there is no support polygon."""


class ParseError(ControlError):
    """A robot, scenario or trace file is malformed."""


class RuntimeFault(ControlError):
    """A module error raised while stepping the closed loop."""

    def __init__(self, tick: int, cause: BaseException):
        self.tick = tick
        self.cause = cause
        super().__init__(f"tick {tick}: {type(cause).__name__}: {cause}")
