"""HTTP service wrapping the allocation simulator."""

from .app import app, create_app

__all__ = ["app", "create_app"]
