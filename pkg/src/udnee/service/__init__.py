"""HTTP service wrapping the analytics and simulation core."""

from .app import create_app

__all__ = ["create_app"]
