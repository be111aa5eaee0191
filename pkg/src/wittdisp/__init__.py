"""Exact arithmetic for Witt vectors, truncated displays and chains of displays."""

__version__ = "0.1.0"
