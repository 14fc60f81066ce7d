"""Noncommutative graphs from finite-group representations and stabilizer codes."""

__version__ = "0.1.0"
