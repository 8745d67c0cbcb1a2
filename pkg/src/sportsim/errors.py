"""Exception types shared across the engine."""


class SportsimError(Exception):
    """Base class for all engine errors."""


class InvalidStateError(SportsimError):
    """A kinematic quantity is non-finite or degenerate."""


class DomainError(SportsimError):
    """Arguments outside the mathematical domain of an operation."""


class NoSolutionError(DomainError):
    """A ballistic trajectory never reaches the requested plane."""


class ConfigError(SportsimError):
    """Bad configuration: unknown sport, mismatched batch, missing entity."""


class InvalidActionError(SportsimError):
    """Action array has the wrong shape or contains NaN."""


class SimulationFaultError(SportsimError):
    """Physics blew up (deep interpenetration, non-finite state)."""


class ReplayError(SportsimError):
    """Trajectory log is corrupt or incompatible with this engine build."""


class ProtocolError(SportsimError):
    """Malformed bridge frame or handshake failure."""
