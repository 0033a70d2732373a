"""HTTP gateway bridging human players to their player processes."""

from .driver import GatewayError, SessionDriver
from .app import create_app

__all__ = ["GatewayError", "SessionDriver", "create_app"]
