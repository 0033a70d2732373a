"""Shared error types for the platform."""


class ConfigError(Exception):
    """Malformed mechanism parameters, scenario, or decision problem."""


class SettlementError(Exception):
    """Tax vector cannot be settled (positive total: money would be minted)."""


class EncodingError(Exception):
    """Value is not a protocol value / cannot be canonically encoded."""


class UnknownTarget(Exception):
    """Send addressed to a process id the transport has never seen."""


class TransportClosed(Exception):
    """Send attempted after the transport was shut down."""


class PhaseViolation(Exception):
    """Operation attempted outside its protocol phase."""


class ProtocolError(Exception):
    """Player-process state machine misuse (e.g. double barrier_enter)."""
