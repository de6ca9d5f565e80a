"""FastAPI service wrapping the simulator."""

from .app import create_app
from .live import LiveEngine

__all__ = ["create_app", "LiveEngine"]
