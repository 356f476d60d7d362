"""Fourier transforms encoded as sparse linear-programming constraints."""

__version__ = "0.1.0"
