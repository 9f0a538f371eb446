"""Exact OPE bootstrap for the two-parameter W-algebra."""

__version__ = "0.1.0"
