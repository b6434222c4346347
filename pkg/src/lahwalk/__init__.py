"""Exact and asymptotic tools for the Lah distribution and random-walk hulls."""

__version__ = "0.1.0"
